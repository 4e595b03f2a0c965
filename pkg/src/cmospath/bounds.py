"""Delay bounds of a bounded path: slowest and fastest reachable delay.

The slowest corner is every free gate at minimum drive.  The fastest
corner makes every free gate's exact delay sensitivity vanish.  The solver
sweeps the link equations of the frozen surrogate, cin[i]^2 = (A_i /
A_{i-1}) * (cin[i+1] + c_par[i]) * cin[i-1], backward from the load,
re-freezing the coefficients between sweeps (quasi-static refresh).  Each
refresh also re-anchors the per-gate target by the snapshot mismatch
between the exact and frozen sensitivities, so the fixed point is
stationary for the exact model; the shift vanishes when parasitics and
coupling are zero, where the plain link equations are already exact.  A
descent check on the exact model guards every sweep, damping steps that
would overshoot.  The same engine with target a < 0 solves the
constant-sensitivity problem used by the area distribution module, so it
lives here and takes a as a parameter.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .errors import ConvergenceError
from .path import GateLibrary, LogicPath, PathModel, PathTiming, Sizing
from .process import ProcessParams

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 500
CAP_TOL = 1e-7
DELAY_TOL = 1e-9
RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class DelayBounds:
    """Reachable delay window of a path and the sizings realizing it."""

    t_min: float
    t_max: float
    sizing_min: Sizing
    sizing_max: Sizing

    def __post_init__(self):
        if self.t_min > self.t_max * (1.0 + 1e-12):
            raise ValueError("t_min must not exceed t_max")


def max_delay_sizing(path: LogicPath, params: ProcessParams,
                     library: GateLibrary) -> tuple[Sizing, float]:
    """Every free gate at minimum drive; the slowest the path can be."""
    model = PathModel(path, params, library)
    sizing = (path.input_cap,) + (params.cref,) * (model.n - 1)
    return sizing, model.evaluate(sizing).total_delay


def _link_sweep(model: PathModel, cin, coeffs, g_exact, g_frozen,
                a: float, cref: float) -> list[float]:
    """One backward Gauss-Seidel pass over the corrected link equations.

    cin[i] <- sqrt(A_i (cin[i+1] + c_par[i]) / (A_{i-1}/cin[i-1] - a_i)),
    where the per-gate target a_i is a minus the snapshot gap between the
    exact and frozen sensitivities at gate i.  Robust far from the
    solution; contracts one stage per pass, so it serves as the fallback
    when the Newton step is unusable.
    """
    n = model.n
    prop = list(cin)
    for i in range(n - 1, 0, -1):
        nxt = prop[i + 1] if i < n - 1 else model.terminal_load
        target = a - (g_exact[i - 1] - g_frozen[i - 1])
        den = coeffs.a[i - 1] / prop[i - 1] - target
        if den > 0.0:
            new = math.sqrt(coeffs.a[i] * (nxt + coeffs.c_par[i]) / den)
        else:
            # No finite size meets the target at this snapshot; grow
            # boundedly and let the next refresh re-balance.
            new = prop[i] * 4.0
        prop[i] = max(cref, new)
    return prop


def _newton_step(model: PathModel, cin, coeffs, g_exact, curvature,
                 a: float, cref: float) -> list[float] | None:
    """One damped log-space Newton step on the stationarity residual.

    Residual r_j = cin[j] * (dT/dcin[j] - a) with the exact sensitivities.
    Curvature is the exact delay Hessian mapped to log sizes, d2/dy2 =
    c^2 T'' + c (T' - a); where that matrix loses positive definiteness
    (its Thomas pivots go non-positive) the frozen surrogate's Hessian
    stands in, which is strictly diagonally dominant and always usable.
    Gates pinned at cref whose residual pushes further down are held
    fixed.  The step is scaled to at most one e-fold per gate and applied
    multiplicatively.  The proposal is returned unclamped so the caller
    can damp along the undistorted direction; clamping each coordinate
    here would bend the direction and can turn it uphill.  Returns None
    only if both systems degenerate.
    """
    n = model.n
    m = n - 1
    hd, ho = curvature

    def solve(frozen: bool) -> list[float] | None:
        diag = [0.0] * m
        sup = [0.0] * m
        sub = [0.0] * m
        rhs = [0.0] * m
        for idx in range(m):
            j = idx + 1
            cj = cin[j]
            r = cj * (g_exact[idx] - a)
            if frozen:
                nxt = cin[j + 1] if j < n - 1 else model.terminal_load
                diag[idx] = cj * coeffs.a[j - 1] / cin[j - 1] \
                    + coeffs.a[j] * (nxt + coeffs.c_par[j]) / cj - a * cj
                if j < n - 1:
                    sup[idx] = -coeffs.a[j] * cin[j + 1] / cj
            else:
                diag[idx] = cj * cj * hd[idx] + r
                if j < n - 1:
                    sup[idx] = cj * cin[j + 1] * ho[idx]
            if idx > 0:
                sub[idx] = sup[idx - 1]
            rhs[idx] = -r
            if cj <= cref * (1.0 + 1e-9) and r > 0.0:
                # Active at the lower bound: hold this gate in place.
                diag[idx] = 1.0
                rhs[idx] = 0.0
                sup[idx] = 0.0
                sub[idx] = 0.0
                if idx > 0:
                    sup[idx - 1] = 0.0
        for idx in range(1, m):
            piv = diag[idx - 1]
            if not piv > 0.0:
                return None
            w = sub[idx] / piv
            diag[idx] -= w * sup[idx - 1]
            rhs[idx] -= w * rhs[idx - 1]
        if not diag[m - 1] > 0.0:
            return None
        step = [0.0] * m
        step[m - 1] = rhs[m - 1] / diag[m - 1]
        for idx in range(m - 2, -1, -1):
            step[idx] = (rhs[idx] - sup[idx] * step[idx + 1]) / diag[idx]
        if not all(math.isfinite(s) for s in step):
            return None
        widest = max(abs(s) for s in step)
        if widest > 1.0:
            step = [s / widest for s in step]
        return [cin[0]] + [cin[j] * math.exp(step[j - 1])
                           for j in range(1, n)]

    prop = solve(frozen=False)
    if prop is None:
        prop = solve(frozen=True)
    return prop


def link_fixed_point(model: PathModel, a: float = 0.0,
                     init_cref: float | None = None,
                     warm: Sizing | None = None,
                     max_iterations: int = MAX_ITERATIONS,
                     cap_tol: float = CAP_TOL,
                     delay_tol: float = DELAY_TOL,
                     certificate=None) -> tuple[Sizing, PathTiming, int]:
    """Solve the equal-sensitivity stationarity system at target a <= 0.

    Seeds with one backward pass of the link equations (predecessor held
    at init_cref), then drives the exact sensitivities dT/dcin[i] to a for
    every unclamped gate: each outer iteration re-freezes the surrogate
    coefficients (quasi-static refresh), takes a tridiagonal Newton step
    on the exact residual with the surrogate's curvature, and falls back
    to a corrected link-equation sweep if the step degenerates.  Both step
    kinds are accepted only if they do not increase the descent merit
    T - a * sum(cin); otherwise the step is damped toward the previous
    sizing in log space, falling back to the exact merit gradient and, as
    a last resort, holding the point.  Sizes are clamped at cref from
    below.  a = 0 is
    the minimum-delay condition.  Iterates until sizes move less than
    cap_tol (relative), the full-model delay moves less than delay_tol
    (relative), and the optional certificate predicate accepts the sizing.
    """
    if a > 0:
        raise ValueError("sensitivity target a must be <= 0")
    n = model.n
    params = model.params
    cref = params.cref
    if init_cref is None:
        init_cref = cref
    if not init_cref > 0:
        raise ValueError("init_cref must be positive")

    if n == 1:
        sizing = (model.input_cap,)
        return sizing, model.evaluate(sizing), 0

    if warm is not None:
        cin = list(warm)
        cin[0] = model.input_cap
    else:
        cin = [model.input_cap] + [cref] * (n - 1)
        # Init pass: each link equation with the predecessor held at
        # init_cref, so the starting point is independent of cref scale.
        coeffs = model.coefficients(cin)
        for i in range(n - 1, 0, -1):
            nxt = cin[i + 1] if i < n - 1 else model.terminal_load
            den = coeffs.a[i - 1] / init_cref - a
            cin[i] = max(cref, math.sqrt(coeffs.a[i] * (nxt + coeffs.c_par[i]) / den))

    timing = model.evaluate(cin)
    merit = timing.total_delay - a * sum(cin[1:])
    prev_delay = timing.total_delay
    max_rel = math.inf
    for outer in range(1, max_iterations + 1):
        coeffs = model.coefficients(cin)
        g_exact = model.model_gradient(cin)
        curvature = model.model_curvature(cin)
        prop = _newton_step(model, cin, coeffs, g_exact, curvature, a, cref)
        if prop is None:
            g_frozen = model.gradient(cin, coeffs)
            prop = _link_sweep(model, cin, coeffs, g_exact, g_frozen, a, cref)

        cand = [prop[0]] + [max(cref, p) for p in prop[1:]]
        cand_timing = model.evaluate(cand)
        cand_merit = cand_timing.total_delay - a * sum(cand[1:])
        if cand_merit > merit + abs(merit) * 1e-12:
            # Damp along the unclamped direction, clamping after the
            # scale: scaling the clamped proposal instead would keep the
            # bent direction at every lambda.
            cand = None
            lam = 0.5
            for _ in range(20):
                trial = [cin[0]] + [
                    max(cref, cin[k] * (prop[k] / cin[k]) ** lam)
                    for k in range(1, n)]
                t_timing = model.evaluate(trial)
                t_merit = t_timing.total_delay - a * sum(trial[1:])
                if t_merit <= merit + abs(merit) * 1e-12:
                    cand, cand_timing, cand_merit = trial, t_timing, t_merit
                    break
                lam *= 0.5
            if cand is None:
                # Every damping of the proposal ascends, so walk the
                # exact merit gradient instead (held gates stay put).
                d = []
                for k in range(1, n):
                    r = cin[k] * (g_exact[k - 1] - a)
                    if cin[k] <= cref * (1.0 + 1e-9) and r > 0.0:
                        d.append(0.0)
                    else:
                        d.append(-r)
                widest = max(abs(s) for s in d)
                if widest > 1.0:
                    d = [s / widest for s in d]
                lam = 1.0
                for _ in range(20):
                    trial = [cin[0]] + [
                        max(cref, cin[k] * math.exp(lam * d[k - 1]))
                        for k in range(1, n)]
                    t_timing = model.evaluate(trial)
                    t_merit = t_timing.total_delay - a * sum(trial[1:])
                    if t_merit <= merit + abs(merit) * 1e-12:
                        cand, cand_timing, cand_merit = trial, t_timing, t_merit
                        break
                    lam *= 0.5
            if cand is None:
                # Neither direction lowers the merit at any damping, so
                # the point is numerically stationary: stand still and
                # let the exit checks and certificate decide.
                cand, cand_timing, cand_merit = list(cin), timing, merit

        max_rel = max(abs(cand[i] - cin[i]) / cin[i] for i in range(1, n))
        delay_ok = (abs(cand_timing.total_delay - prev_delay)
                    <= delay_tol * cand_timing.total_delay)
        cin = list(cand)
        timing = cand_timing
        merit = cand_merit
        prev_delay = cand_timing.total_delay
        if max_rel < cap_tol and delay_ok:
            if certificate is None or certificate(tuple(cin), timing):
                clamped = [i for i in range(1, n)
                           if cin[i] <= cref * (1.0 + 1e-9)]
                if clamped:
                    logger.debug("fixed point clamped gates at cref: %s", clamped)
                return tuple(cin), timing, outer
    raise ConvergenceError("sizing fixed point did not converge",
                           iterations=max_iterations, residual=max_rel)


def min_delay_sizing(path: LogicPath, params: ProcessParams,
                     library: GateLibrary, init_cref: float | None = None,
                     max_iterations: int = MAX_ITERATIONS,
                     warm: Sizing | None = None) -> tuple[Sizing, float, int]:
    """Fastest sizing of the path and its delay.

    init_cref seeds the backward init pass (predecessor size in the first
    sweep); the converged answer does not depend on it.  Convergence also
    requires the scaled residual max |g_i| * cref / t_min of unclamped
    gates to fall below 1e-6, with g the exact-model sensitivities.
    """
    model = PathModel(path, params, library)

    def residual_ok(sizing, timing):
        g = model.model_gradient(sizing)
        clamped = model.clamped(sizing)
        worst = 0.0
        for j in range(1, model.n):
            if clamped[j]:
                continue
            worst = max(worst, abs(g[j - 1]))
        return worst * params.cref / timing.total_delay < RESIDUAL_TOL

    sizing, timing, iters = link_fixed_point(
        model, a=0.0, init_cref=init_cref, warm=warm,
        max_iterations=max_iterations, certificate=residual_ok)
    return sizing, timing.total_delay, iters


def compute_bounds(path: LogicPath, params: ProcessParams,
                   library: GateLibrary) -> DelayBounds:
    """Both delay extremes of a path."""
    sizing_max, t_max = max_delay_sizing(path, params, library)
    sizing_min, t_min, _ = min_delay_sizing(path, params, library)
    return DelayBounds(t_min=t_min, t_max=t_max,
                       sizing_min=sizing_min, sizing_max=sizing_max)


def feasibility(path: LogicPath, tc: float, bounds: DelayBounds) -> bool:
    """Whether a delay constraint is reachable by sizing alone."""
    if not tc > 0:
        raise ValueError("tc must be positive")
    return tc >= bounds.t_min
