"""Exception types shared across the package."""

from __future__ import annotations


class CmosPathError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(CmosPathError):
    """Malformed process config or path file.

    Messages carry the offending key name and, when available, the
    1-based line number of the input text.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InfeasibleError(CmosPathError):
    """A delay constraint below what the structure can achieve.

    Carries the best achievable minimum delay so callers can report how
    far away the constraint is.  The optimizer also attaches the best
    structure it found and the trace of attempted transformations.
    """

    def __init__(self, message: str, t_min: float | None = None,
                 best_path=None, trace=None):
        super().__init__(message)
        self.t_min = t_min
        self.best_path = best_path
        self.trace = trace if trace is not None else []


class ConvergenceError(CmosPathError):
    """An iterative solver ran out of iterations.

    Carries the iteration count and the last residual so the failure is
    diagnosable from the message alone.
    """

    def __init__(self, message: str, iterations: int | None = None,
                 residual: float | None = None):
        if iterations is not None:
            message = f"{message} (iterations={iterations}, residual={residual:.3e})"
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
