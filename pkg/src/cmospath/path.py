"""Bounded path representation and delay evaluation.

A path is a chain of inverting gates with both endpoints electrically
fixed: the first gate's input capacitance is pinned by the driving stage
and the last gate drives a fixed terminal load.  Evaluation walks the
chain once, alternating transition polarity at every node and feeding each
gate's output transition time into the next gate's delay term.

Two views of the total delay coexist.  ``evaluate_path`` is the exact
chained model.  ``path_coefficients`` regroups the same expression by each
gate's output transition time into T = const + sum A_i * (cin[i+1] +
c_par[i]) / cin[i], freezing the Miller factors and parasitics at the
current sizing.  At the freezing point both views agree to rounding; away
from it the frozen view is the surrogate the solvers sweep, with its
sensitivities re-anchored to the exact model at every refresh.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field

from .errors import ConfigError
from .process import (
    FALLING,
    RISING,
    GateInstance,
    GateLibrary,
    GateTemplate,
    ProcessParams,
    miller_factor,
    other_edge,
    symmetry_factors,
)

Sizing = tuple[float, ...]


@dataclass(frozen=True)
class LogicPath:
    """A bounded chain of library gate kinds.

    gates            gate kind names, input to output
    input_cap        fixed input capacitance of the first gate (fF)
    terminal_load    fixed capacitance at the last output node (fF)
    input_edge       polarity of the transition entering gate 0
    driver_slope_rise / driver_slope_fall
                     transition time of the driving signal per polarity (ps)
    seed_cin         optional per-gate starting sizes from the path file
    side_inverted    per-gate flag: True when the gate's side inputs pass
                     through added off-path inverters (set by rewrites)
    offpath_inverters  count of off-path inverters charged to this path's
                     area (kept at minimum drive)
    polarity_flips   net inversions added by single-inverter insertions
    """

    gates: tuple[str, ...]
    input_cap: float
    terminal_load: float
    input_edge: str = RISING
    driver_slope_rise: float = 0.0
    driver_slope_fall: float = 0.0
    seed_cin: tuple[float | None, ...] | None = None
    side_inverted: tuple[bool, ...] | None = None
    offpath_inverters: int = 0
    polarity_flips: int = 0

    def __post_init__(self):
        if len(self.gates) < 1:
            raise ValueError("a path needs at least one gate")
        if not self.input_cap > 0:
            raise ValueError("input_cap must be positive")
        if not self.terminal_load > 0:
            raise ValueError("terminal_load must be positive")
        if self.input_edge not in (RISING, FALLING):
            raise ValueError(f"bad input_edge: {self.input_edge!r}")
        if self.driver_slope_rise < 0 or self.driver_slope_fall < 0:
            raise ValueError("driver slopes must be non-negative")
        if self.seed_cin is not None and len(self.seed_cin) != len(self.gates):
            raise ValueError("seed_cin length must match gates")
        if self.side_inverted is not None and len(self.side_inverted) != len(self.gates):
            raise ValueError("side_inverted length must match gates")
        if self.offpath_inverters < 0:
            raise ValueError("offpath_inverters must be non-negative")

    @property
    def n(self) -> int:
        return len(self.gates)

    def driver_slope(self) -> float:
        return (self.driver_slope_rise if self.input_edge == RISING
                else self.driver_slope_fall)

    def side_flag(self, i: int) -> bool:
        return bool(self.side_inverted[i]) if self.side_inverted is not None else False


@dataclass(frozen=True)
class PathTiming:
    """Result of one exact path evaluation."""

    per_gate_delay: tuple[float, ...]
    per_gate_slope: tuple[float, ...]
    total_delay: float
    total_width: float


@dataclass(frozen=True)
class CoefficientSet:
    """Frozen regrouping of the path delay at one sizing snapshot.

    a[i] multiplies (cin[i+1] + c_par[i]) / cin[i] in the frozen delay;
    c_par holds the parasitics frozen at the snapshot.  The constant term
    is the driving stage's slope contribution into gate 0.
    """

    a: tuple[float, ...]
    c_par: tuple[float, ...]
    constant_term: float
    terminal_load: float

    def frozen_delay(self, sizing: Sizing) -> float:
        n = len(self.a)
        total = self.constant_term
        for i in range(n):
            nxt = sizing[i + 1] if i < n - 1 else self.terminal_load
            total += self.a[i] * (nxt + self.c_par[i]) / sizing[i]
        return total


class PathModel:
    """Per-path evaluation context with the edge chain precomputed.

    Alternating polarity fixes, per gate: which symmetry factor governs
    its output transition, which threshold weights its input slope term,
    and which coupling split applies.  Solvers construct one model per
    structure and reuse it across iterations.
    """

    def __init__(self, path: LogicPath, params: ProcessParams,
                 library: GateLibrary):
        self.path = path
        self.params = params
        self.n = path.n
        self.input_cap = path.input_cap
        self.terminal_load = path.terminal_load

        if path.input_cap < params.cref * (1.0 - 1e-12):
            raise ValueError("input_cap below the minimum realizable cin")

        self.templates: list[GateTemplate] = []
        for kind in path.gates:
            if kind not in library:
                raise ConfigError(f"unknown gate kind: {kind}")
            self.templates.append(library[kind])

        edge_in = path.input_edge
        self._s_out: list[float] = []     # symmetry factor for the output edge
        self._v_in: list[float] = []      # threshold weighting the input slope
        self._v_next: list[float] = []    # threshold of the next gate, 0 at the end
        self._gamma: list[float | None] = []  # cin share for c_m, None if overridden
        self._cm_fixed: list[float] = []
        self._par: list[float] = []
        self.out_edges: list[str] = []

        k = params.k_ratio
        for i, template in enumerate(self.templates):
            edge_out = other_edge(edge_in)
            s_hl, s_lh = symmetry_factors(template, params)
            self._s_out.append(s_hl if edge_out == FALLING else s_lh)
            self._v_in.append(params.threshold(edge_in))
            if template.cm_override is not None:
                self._gamma.append(None)
                self._cm_fixed.append(template.cm_override)
            else:
                share = k if edge_in == RISING else 1.0
                self._gamma.append(share / (2.0 * (1.0 + k)))
                self._cm_fixed.append(0.0)
            self._par.append(template.par_coeff)
            self.out_edges.append(edge_out)
            edge_in = edge_out
        for i in range(self.n - 1):
            self._v_next.append(self._v_in[i + 1])
        self._v_next.append(0.0)

    def check_sizing(self, sizing) -> None:
        if len(sizing) != self.n:
            raise ValueError("mismatched sizing length: "
                             f"{len(sizing)} sizes for {self.n} gates")
        if abs(sizing[0] - self.input_cap) > 1e-9 * self.input_cap:
            raise ValueError("cin[0] must equal the path's fixed input_cap")
        cref = self.params.cref
        for i, c in enumerate(sizing):
            if c < cref * (1.0 - 1e-9):
                raise ValueError(f"cin[{i}] below the minimum realizable cin")

    def loads(self, sizing) -> list[float]:
        out = []
        for i in range(self.n):
            nxt = sizing[i + 1] if i < self.n - 1 else self.terminal_load
            out.append(nxt + self._par[i] * sizing[i])
        return out

    def c_m(self, i: int, cin_i: float) -> float:
        g = self._gamma[i]
        return self._cm_fixed[i] if g is None else g * cin_i

    def total_width(self, sizing) -> float:
        cap = sum(sizing) + self.path.offpath_inverters * self.params.cref
        return cap / self.params.cap_per_width

    def evaluate(self, sizing) -> PathTiming:
        """Exact chained delay of the path at one sizing."""
        self.check_sizing(sizing)
        p = self.params
        tau = p.tau
        warn_ratio = p.slope_warn_ratio
        slope = self.path.driver_slope()
        delays = []
        slopes = []
        total = 0.0
        for i in range(self.n):
            c = sizing[i]
            load = (sizing[i + 1] if i < self.n - 1 else self.terminal_load) \
                + self._par[i] * c
            t_out = tau * self._s_out[i] * load / c
            c_m = self.c_m(i, c)
            d = self._v_in[i] / 2.0 * slope \
                + miller_factor(c_m, load) * t_out / 2.0
            if warn_ratio is not None and slope > warn_ratio * t_out:
                warnings.warn(
                    f"gate {i} ({self.path.gates[i]}): input transition "
                    f"{slope:.4g} ps exceeds {warn_ratio:g}x its output "
                    f"transition {t_out:.4g} ps; model accuracy degrades "
                    "for slow inputs", stacklevel=2)
            delays.append(d)
            slopes.append(t_out)
            total += d
            slope = t_out
        return PathTiming(tuple(delays), tuple(slopes), total,
                          self.total_width(sizing))

    def coefficients(self, sizing) -> CoefficientSet:
        """Freeze Miller factors and parasitics at the given sizing.

        Gate i's output transition time appears twice in the exact total:
        in its own Miller term and in gate i+1's slope term.  Collecting
        both gives a[i] = tau * S_i * (M_i + v_next) / 2, with v_next = 0
        for the last gate.  The driving slope contributes the constant.
        """
        self.check_sizing(sizing)
        tau = self.params.tau
        a = []
        c_par = []
        for i in range(self.n):
            c = sizing[i]
            cp = self._par[i] * c
            load = (sizing[i + 1] if i < self.n - 1 else self.terminal_load) + cp
            m = miller_factor(self.c_m(i, c), load)
            a.append(tau * self._s_out[i] * (m + self._v_next[i]) / 2.0)
            c_par.append(cp)
        constant = self._v_in[0] / 2.0 * self.path.driver_slope()
        return CoefficientSet(tuple(a), tuple(c_par), constant,
                              self.terminal_load)

    def gradient(self, sizing, coeffs: CoefficientSet | None = None) -> tuple[float, ...]:
        """Frozen-model delay sensitivities for the free gates 1..n-1.

        Component j (0-based gate index j >= 1) is
        a[j-1]/cin[j-1] - a[j]*(cin[j+1] + c_par[j])/cin[j]^2, coefficients
        and parasitics frozen at the evaluation sizing unless a snapshot is
        supplied.
        """
        if coeffs is None:
            coeffs = self.coefficients(sizing)
        a = coeffs.a
        cp = coeffs.c_par
        out = []
        for j in range(1, self.n):
            nxt = sizing[j + 1] if j < self.n - 1 else self.terminal_load
            out.append(a[j - 1] / sizing[j - 1]
                       - a[j] * (nxt + cp[j]) / (sizing[j] * sizing[j]))
        return tuple(out)

    def model_gradient(self, sizing) -> tuple[float, ...]:
        """Exact-model delay sensitivities for the free gates 1..n-1.

        Closed-form derivative of evaluate() with everything live: growing
        cin[j] loads gate j-1 (raising its transition time but lowering its
        Miller factor), speeds up gate j's own fanout, and raises gate j's
        coupling share.  Self-loading c_par[j] = p * cin[j] drops out of
        gate j's own term because it scales with the gate itself.
        """
        self.check_sizing(sizing)
        tau = self.params.tau
        n = self.n
        out = []
        for j in range(1, n):
            up = j - 1
            c_up = sizing[up]
            load_up = sizing[j] + self._par[up] * c_up
            m_up = self.c_m(up, c_up)
            w_up = tau * self._s_out[up] * load_up / (2.0 * c_up)
            mil_up = miller_factor(m_up, load_up)
            g = (mil_up + self._v_next[up]) * tau * self._s_out[up] / (2.0 * c_up) \
                - w_up * 2.0 * m_up / (m_up + load_up) ** 2

            c_j = sizing[j]
            nxt = sizing[j + 1] if j < n - 1 else self.terminal_load
            load_j = nxt + self._par[j] * c_j
            m_j = self.c_m(j, c_j)
            w_j = tau * self._s_out[j] * load_j / (2.0 * c_j)
            mil_j = miller_factor(m_j, load_j)
            gamma = self._gamma[j]
            if gamma is None:
                gamma = 0.0
            g -= (mil_j + self._v_next[j]) * tau * self._s_out[j] * nxt \
                / (2.0 * c_j * c_j)
            g += w_j * 2.0 * (gamma * load_j - m_j * self._par[j]) \
                / (m_j + load_j) ** 2
            out.append(g)
        return tuple(out)

    def model_curvature(self, sizing) -> tuple[list[float], list[float]]:
        """Tridiagonal second derivatives of the exact delay.

        Returns (diag, off) over the free gates: diag[j-1] is
        d2T/dcin[j]^2 and off[j-1] is d2T/dcin[j]dcin[j+1] (zero for the
        last gate, whose downstream node is the fixed terminal load).
        Only adjacent gates couple, so the full Hessian is this symmetric
        tridiagonal matrix.
        """
        self.check_sizing(sizing)
        tau = self.params.tau
        n = self.n
        f_cc = [0.0] * n
        f_cx = [0.0] * n
        f_xx = [0.0] * n
        for i in range(n):
            c = sizing[i]
            x = sizing[i + 1] if i < n - 1 else self.terminal_load
            p = self._par[i]
            load = x + p * c
            gamma = self._gamma[i]
            if gamma is None:
                gamma = 0.0
            m = self.c_m(i, c)
            k_half = tau * self._s_out[i] / 2.0
            v = self._v_next[i]
            den = m + load
            mil = 1.0 + 2.0 * m / den
            mil_m = 2.0 * load / (den * den)
            mil_load = -2.0 * m / (den * den)
            den3 = den * den * den
            mil_mm = -4.0 * load / den3
            mil_mload = 2.0 * (m - load) / den3
            mil_loadload = 4.0 * m / den3
            mil_c = gamma * mil_m + p * mil_load
            f_cc[i] = k_half * (
                (gamma * gamma * mil_mm + 2.0 * gamma * p * mil_mload
                 + p * p * mil_loadload) * load / c
                - 2.0 * mil_c * x / (c * c)
                + 2.0 * (mil + v) * x / (c * c * c))
            f_cx[i] = k_half * (
                (gamma * mil_mload + p * mil_loadload) * load / c
                + mil_c / c - mil_load * x / (c * c) - (mil + v) / (c * c))
            f_xx[i] = k_half * (mil_loadload * load / c + 2.0 * mil_load / c)
        diag = []
        off = []
        for j in range(1, n):
            diag.append(f_cc[j] + f_xx[j - 1])
            off.append(f_cx[j] if j < n - 1 else 0.0)
        return diag, off

    def clamped(self, sizing) -> list[bool]:
        """Which free gates sit at the minimum realizable size."""
        cref = self.params.cref
        return [sizing[i] <= cref * (1.0 + 1e-9) for i in range(self.n)]


def evaluate_path(path: LogicPath, sizing, params: ProcessParams,
                  library: GateLibrary) -> PathTiming:
    """Exact chained delay, slopes, and total width at one sizing."""
    return PathModel(path, params, library).evaluate(sizing)


def path_coefficients(path: LogicPath, sizing, params: ProcessParams,
                      library: GateLibrary) -> CoefficientSet:
    """Frozen coefficient snapshot at one sizing."""
    return PathModel(path, params, library).coefficients(sizing)


def path_gradient(path: LogicPath, sizing, params: ProcessParams,
                  library: GateLibrary,
                  coeffs: CoefficientSet | None = None) -> tuple[float, ...]:
    """Frozen-model gradient over the free gates."""
    return PathModel(path, params, library).gradient(sizing, coeffs)


def exact_path_gradient(path: LogicPath, sizing, params: ProcessParams,
                        library: GateLibrary) -> tuple[float, ...]:
    """Exact-model gradient over the free gates."""
    return PathModel(path, params, library).model_gradient(sizing)


_PATH_HEADER_KEYS = {
    "input_cap_ff": "input_cap",
    "load_ff": "terminal_load",
    "input_edge": "input_edge",
    "driver_slope_rise_ps": "driver_slope_rise",
    "driver_slope_fall_ps": "driver_slope_fall",
}

_PATH_REQUIRED = ("input_cap_ff", "load_ff")

_CIN_RE = re.compile(r"^cin=([^\s]+)$")


def parse_path_file(text: str) -> LogicPath:
    """Parse the line-oriented path format into a LogicPath.

    Header ``key = value`` lines first (input_cap_ff and load_ff required;
    input_edge defaults to rising, driver slopes to 0), then one gate kind
    per line with an optional ``cin=<fF>`` starting size.
    """
    header: dict[str, object] = {}
    seen: dict[str, int] = {}
    gates: list[str] = []
    seeds: list[float | None] = []

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line
        hash_pos = line.find("#")
        if hash_pos >= 0:
            line = line[:hash_pos]
        line = line.strip()
        if not line:
            continue
        if "=" in line and not line.split()[0].startswith("cin="):
            first = line.split("=")[0].strip()
            if first in _PATH_HEADER_KEYS:
                if gates:
                    raise ConfigError(f"header key {first} after gate lines", line_no)
                if first in seen:
                    raise ConfigError(f"duplicate key {first}", line_no)
                raw_value = line.partition("=")[2].strip()
                if first == "input_edge":
                    if raw_value not in (RISING, FALLING):
                        raise ConfigError(
                            f"input_edge must be rising or falling, got {raw_value!r}",
                            line_no)
                    header["input_edge"] = raw_value
                else:
                    try:
                        header[_PATH_HEADER_KEYS[first]] = float(raw_value)
                    except ValueError:
                        raise ConfigError(
                            f"non-numeric value for {first}: {raw_value!r}",
                            line_no) from None
                seen[first] = line_no
                continue
        tokens = line.split()
        kind = tokens[0]
        seed = None
        for tok in tokens[1:]:
            m = _CIN_RE.match(tok)
            if m is None:
                raise ConfigError(f"unexpected token {tok!r} on gate line", line_no)
            try:
                seed = float(m.group(1))
            except ValueError:
                raise ConfigError(f"non-numeric cin on gate line: {tok!r}",
                                  line_no) from None
            if not seed > 0:
                raise ConfigError("cin on gate line must be positive", line_no)
        gates.append(kind)
        seeds.append(seed)

    for key in _PATH_REQUIRED:
        if key not in seen:
            raise ConfigError(f"missing required key: {key}")
    if not gates:
        raise ConfigError("path file lists no gates")

    try:
        return LogicPath(
            gates=tuple(gates),
            input_cap=float(header["input_cap"]),
            terminal_load=float(header["terminal_load"]),
            input_edge=str(header.get("input_edge", RISING)),
            driver_slope_rise=float(header.get("driver_slope_rise", 0.0)),
            driver_slope_fall=float(header.get("driver_slope_fall", 0.0)),
            seed_cin=tuple(seeds) if any(s is not None for s in seeds) else None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_path_text_file(path: str) -> LogicPath:
    """parse_path_file on a file, prefixing errors with the file name."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read path file {path}: {exc.strerror}") from None
    try:
        return parse_path_file(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
