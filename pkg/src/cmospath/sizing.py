"""Area distribution under a delay constraint via constant sensitivity.

At the area-optimal sizing for a given delay budget every free gate sees
the same delay-per-capacitance sensitivity a <= 0; a = 0 is the fastest
point and a -> -inf collapses everything to minimum drive.  Solving the
stationarity system at a fixed a and bisecting on a until the achieved
delay matches the constraint turns the constrained area problem into a
one-dimensional search.  An equal-delay-per-stage reference sizing is
included for comparison; it is a heuristic, not an optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bounds import DelayBounds, compute_bounds, link_fixed_point
from .errors import ConvergenceError, InfeasibleError
from .path import GateLibrary, LogicPath, PathModel, Sizing
from .process import ProcessParams, miller_factor

DELAY_MATCH_TOL = 1e-3
SPREAD_REL = 1e-4
SPREAD_FLOOR = 2e-6


@dataclass(frozen=True)
class SensitivitySolution:
    """A converged constant-sensitivity sizing."""

    a_value: float
    sizing: Sizing
    delay: float
    area: float
    note: str | None = None

    def __post_init__(self):
        if self.a_value > 0:
            raise ValueError("a_value must be <= 0")


def _certificate(model: PathModel, a: float):
    """Equal-sensitivity spread check over unclamped free gates.

    The absolute floor scales like the minimum-delay residual criterion,
    delay / cref, so a = 0 demands the same stationarity quality as the
    bounds solver instead of an unreachable fixed epsilon.
    """
    cref = model.params.cref

    def ok(sizing, timing):
        g = model.model_gradient(sizing)
        clamped = model.clamped(sizing)
        free = [g[j - 1] for j in range(1, model.n) if not clamped[j]]
        if len(free) < 2:
            return True
        bound = SPREAD_REL * abs(a) + SPREAD_FLOOR * timing.total_delay / cref
        return max(free) - min(free) <= bound

    return ok


def _solve(model: PathModel, a: float, warm: Sizing | None = None,
           init_cref: float | None = None) -> SensitivitySolution:
    sizing, timing, _ = link_fixed_point(
        model, a=a, warm=warm, init_cref=init_cref,
        certificate=_certificate(model, a))
    return SensitivitySolution(a_value=a, sizing=sizing,
                               delay=timing.total_delay,
                               area=timing.total_width)


def solve_at_sensitivity(path: LogicPath, a: float, params: ProcessParams,
                         library: GateLibrary,
                         warm: Sizing | None = None) -> SensitivitySolution:
    """Sizing whose free delay sensitivities all equal a (a <= 0).

    Same fixed-point engine and tolerances as the minimum-delay solve,
    plus an equal-sensitivity certificate: the spread of unclamped exact
    sensitivities stays within 1e-4 * |a| + 2e-6 * delay / cref.
    """
    if a > 0:
        raise ValueError("sensitivity target a must be <= 0")
    return _solve(PathModel(path, params, library), a, warm=warm)


def _all_free_clamped(model: PathModel, sizing: Sizing) -> bool:
    clamped = model.clamped(sizing)
    return all(clamped[1:]) if model.n > 1 else True


def distribute_constraint(path: LogicPath, tc: float, params: ProcessParams,
                          library: GateLibrary,
                          bounds: DelayBounds | None = None) -> SensitivitySolution:
    """Minimum-area sizing meeting delay constraint tc.

    Bisects on the sensitivity a between the fastest point (a = 0) and a
    geometrically expanded lower bracket until the achieved delay is
    within 0.1% of tc.  tc below t_min raises InfeasibleError carrying
    t_min; tc at or above t_max returns the all-minimum sizing with a
    note.
    """
    if not tc > 0:
        raise ValueError("tc must be positive")
    model = PathModel(path, params, library)
    if bounds is None:
        bounds = compute_bounds(path, params, library)
    if tc < bounds.t_min:
        raise InfeasibleError(
            f"constraint {tc:.6g} ps below minimum achievable delay "
            f"{bounds.t_min:.6g} ps", t_min=bounds.t_min, best_path=path)

    a_floor = -1e6 * bounds.t_min / params.cref
    if tc >= bounds.t_max:
        sol = _solve(model, a_floor)
        return SensitivitySolution(
            a_value=sol.a_value, sizing=sol.sizing, delay=sol.delay,
            area=sol.area,
            note="constraint at or above the all-minimum-drive delay; "
                 "every free gate held at cref")

    sol_hi = _solve(model, 0.0)
    if abs(sol_hi.delay - tc) <= DELAY_MATCH_TOL * tc:
        return sol_hi

    # Expand the lower bracket geometrically until the delay overshoots tc.
    scale = -bounds.t_min / (model.n * params.cref)
    a_lo = scale * 1e-3
    sol_lo = _solve(model, a_lo, warm=sol_hi.sizing)
    guard = 0
    while sol_lo.delay < tc:
        if _all_free_clamped(model, sol_lo.sizing):
            break
        a_lo *= 8.0
        if a_lo < a_floor:
            a_lo = a_floor
        sol_lo = _solve(model, a_lo, warm=sol_lo.sizing)
        guard += 1
        if guard > 80:
            raise ConvergenceError("bracket expansion failed to reach tc",
                                   iterations=guard, residual=sol_lo.delay - tc)
    if abs(sol_lo.delay - tc) <= DELAY_MATCH_TOL * tc:
        return sol_lo
    if sol_lo.delay < tc:
        # Everything clamped and still faster than tc can only happen in
        # the tc >= t_max region handled above; keep a guarded exit.
        return sol_lo

    lo, hi = a_lo, 0.0
    sol = sol_lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        sol = _solve(model, mid, warm=sol.sizing)
        if abs(sol.delay - tc) <= DELAY_MATCH_TOL * tc:
            return sol
        if sol.delay > tc:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError("sensitivity bisection did not meet the constraint",
                           iterations=200, residual=abs(sol.delay - tc) / tc)


def sweep(path: LogicPath, a_values, params: ProcessParams,
          library: GateLibrary) -> tuple[list[SensitivitySolution],
                                         list[tuple[float, Exception]]]:
    """Constant-sensitivity solutions over a grid of a values.

    Rows come back ordered by a ascending (most negative first); solver
    failures are collected per row instead of aborting the sweep.
    """
    model = PathModel(path, params, library)
    solutions: list[SensitivitySolution] = []
    failures: list[tuple[float, Exception]] = []
    warm: Sizing | None = None
    for a in sorted(a_values):
        if a > 0:
            failures.append((a, ValueError("sensitivity target a must be <= 0")))
            continue
        try:
            sol = _solve(model, a, warm=warm)
        except (ConvergenceError, ValueError) as exc:
            failures.append((a, exc))
            continue
        solutions.append(sol)
        warm = sol.sizing
    return solutions, failures


def _stage_delay(model: PathModel, i: int, cin: float, next_cap: float,
                 input_slope: float) -> float:
    """Exact delay of gate i at size cin with a fixed input slope."""
    load = next_cap + model._par[i] * cin
    t_out = model.params.tau * model._s_out[i] * load / cin
    m = miller_factor(model.c_m(i, cin), load)
    return model._v_in[i] / 2.0 * input_slope + m * t_out / 2.0


def equal_delay_distribution(path: LogicPath, tc: float,
                             params: ProcessParams,
                             library: GateLibrary) -> Sizing:
    """Reference sizing giving every stage the same delay budget tc/n.

    Backward per-stage solves with input slopes taken from the previous
    full evaluation, then one slope-refresh round and a final check that
    the exact total stays within 1% of tc.  Stages already at minimum
    drive below their budget are left clamped.  A stage whose parasitic
    self-loading floor sits above the equal share takes its achievable
    floor instead (paying for it in size) and the stages closer to the
    input absorb the deficit; this is the saturated extreme of the
    over-sizing the method is known for.  Raises InfeasibleError when
    even that redistribution cannot land the total under tc.
    """
    if not tc > 0:
        raise ValueError("tc must be positive")
    model = PathModel(path, params, library)
    n = model.n
    cref = params.cref
    sizing = [path.input_cap] + [cref] * (n - 1)

    for sweep_round in range(2):
        slopes_in = [path.driver_slope()] + \
            list(model.evaluate(sizing).per_gate_slope[:-1])
        pool = tc
        for i in range(n - 1, 0, -1):
            next_cap = sizing[i + 1] if i < n - 1 else model.terminal_load
            slope = slopes_in[i]
            # stages i..0 still have to fit into what is left of tc
            target = pool / (i + 1)
            # delay never falls below the huge-size limit; budget at
            # least that, plus a margin the bisection can actually hit
            floor = _stage_delay(model, i, 1e9, next_cap, slope)
            if floor >= target:
                target = floor * 1.05
            if target >= pool:
                raise InfeasibleError(
                    f"stage {i} needs {target:.6g} ps, exhausting the "
                    f"remaining budget {pool:.6g} ps of the equal split")
            if _stage_delay(model, i, cref, next_cap, slope) <= target:
                sizing[i] = cref
            else:
                lo = cref
                hi = cref * 2.0
                guard = 0
                while _stage_delay(model, i, hi, next_cap, slope) > target:
                    lo = hi
                    hi *= 2.0
                    guard += 1
                    if guard > 120:
                        raise InfeasibleError(
                            f"stage {i} cannot reach its budget "
                            f"{target:.6g} ps at any realizable size")
                for _ in range(100):
                    mid = 0.5 * (lo + hi)
                    if _stage_delay(model, i, mid, next_cap, slope) > target:
                        lo = mid
                    else:
                        hi = mid
                    if hi - lo <= 1e-12 * hi:
                        break
                sizing[i] = hi
            pool -= _stage_delay(model, i, sizing[i], next_cap, slope)

    total = model.evaluate(sizing).total_delay
    if total > tc * 1.01:
        raise InfeasibleError(
            f"equal-delay distribution lands at {total:.6g} ps, above the "
            f"constraint {tc:.6g} ps", t_min=None)
    return tuple(sizing)


def path_area(path: LogicPath, sizing, params: ProcessParams,
              library: GateLibrary) -> float:
    """Total transistor width of a sizing, off-path inverters included."""
    return PathModel(path, params, library).total_width(sizing)
