"""Delay window of a path: minimum-delay solver and the all-cref ceiling."""

import math
import random

import pytest

import oracles
from cmospath import (
    ConvergenceError,
    GateTemplate,
    LogicPath,
    PathModel,
    ProcessParams,
    compute_bounds,
    evaluate_path,
    exact_path_gradient,
    feasibility,
    max_delay_sizing,
    min_delay_sizing,
    path_coefficients,
)


def ideal_chain(n, input_cap, load, params_kwargs=None):
    """All-inverter chain with no parasitics or coupling."""
    kw = dict(tau=10.0, vtn=1e-9, vtp=1e-9, r_ratio=2.0, k_ratio=2.0,
              cref=1.0, cap_per_width=2.0)
    if params_kwargs:
        kw.update(params_kwargs)
    params = ProcessParams(**kw)
    inv = GateTemplate(name="inv", n_inputs=1, dw_hl=1.0, dw_lh=1.0,
                       par_coeff=0.0, cm_override=0.0)
    path = LogicPath(gates=("inv",) * n, input_cap=input_cap,
                     terminal_load=load)
    return path, params, {"inv": inv}


class TestMaxDelay:
    def test_all_free_gates_at_cref(self, ref_params, ref_library, chain11):
        sizing, t_max = max_delay_sizing(chain11, ref_params, ref_library)
        assert sizing[0] == chain11.input_cap
        assert all(c == ref_params.cref for c in sizing[1:])
        assert t_max > 0

    def test_single_gate_window_collapses(self, ref_params, ref_library):
        path = LogicPath(gates=("inv",), input_cap=4.0, terminal_load=30.0)
        bounds = compute_bounds(path, ref_params, ref_library)
        assert bounds.t_min == bounds.t_max

    def test_heavier_load_is_slower(self, ref_params, ref_library):
        base = LogicPath(gates=("inv", "nand2"), input_cap=4.0,
                         terminal_load=50.0)
        heavier = LogicPath(gates=("inv", "nand2"), input_cap=4.0,
                            terminal_load=80.0)
        _, t1 = max_delay_sizing(base, ref_params, ref_library)
        _, t2 = max_delay_sizing(heavier, ref_params, ref_library)
        assert t2 > t1


class TestMinDelayClosedForms:
    def test_geometric_mean_single_free_gate(self):
        path, params, lib = ideal_chain(2, 1.0, 64.0)
        sizing, _, _ = min_delay_sizing(path, params, lib)
        assert sizing[1] == pytest.approx(8.0, rel=1e-6)

    def test_uniform_taper(self):
        path, params, lib = ideal_chain(3, 1.0, 64.0)
        sizing, _, _ = min_delay_sizing(path, params, lib)
        assert sizing[1] == pytest.approx(4.0, rel=1e-6)
        assert sizing[2] == pytest.approx(16.0, rel=1e-6)

    def test_link_equations_hold_without_feedback(self):
        # with nothing frozen (no parasitics, no coupling) the stationary
        # point satisfies the product form c_i^2 = (A_i/A_{i-1}) c_next c_prev
        path, params, lib = ideal_chain(5, 2.0, 500.0,
                                        {"vtn": 0.2, "vtp": 0.3,
                                         "k_ratio": 1.0})
        sizing, _, _ = min_delay_sizing(path, params, lib)
        coeffs = path_coefficients(path, sizing, params, lib)
        for i in range(1, path.n):
            nxt = sizing[i + 1] if i + 1 < path.n else path.terminal_load
            want = math.sqrt(coeffs.a[i] / coeffs.a[i - 1]
                             * (nxt + coeffs.c_par[i]) * sizing[i - 1])
            assert sizing[i] == pytest.approx(want, rel=1e-5)


class TestMinDelaySolver:
    def test_matches_grid_oracle(self, ref_params, ref_library):
        path = LogicPath(gates=("inv", "nand2", "nor2", "inv"),
                         input_cap=4.0, terminal_load=120.0,
                         input_edge="rising", driver_slope_rise=40.0,
                         driver_slope_fall=40.0)
        _, t_min, _ = min_delay_sizing(path, ref_params, ref_library)
        tpls = [ref_library[k] for k in path.gates]
        t_grid, _ = oracles.grid_min_delay(
            tpls, path.input_cap, path.terminal_load, path.input_edge,
            40.0, 40.0, ref_params, lo=ref_params.cref, hi=360.0)
        assert abs(t_min - t_grid) / t_grid <= 5e-3
        # the solver should never sit above a finite grid sample
        assert t_min <= t_grid * (1.0 + 1e-9)

    def test_initialization_independence(self, ref_params, ref_library,
                                         chain13):
        results = []
        for factor in (0.25, 1.0, 4.0, 10.0):
            _, t_min, iters = min_delay_sizing(
                chain13, ref_params, ref_library,
                init_cref=factor * ref_params.cref)
            assert iters < 500
            results.append(t_min)
        spread = (max(results) - min(results)) / min(results)
        assert spread <= 1e-3

    def test_stationarity_certificate(self, ref_params, ref_library,
                                      chain11, chain13, heavy_path):
        for path in (chain11, chain13, heavy_path):
            sizing, t_min, _ = min_delay_sizing(path, ref_params,
                                                ref_library)
            grad = exact_path_gradient(path, sizing, ref_params,
                                       ref_library)
            model = PathModel(path, ref_params, ref_library)
            clamped = model.clamped(sizing)
            residual = max((abs(g) for g, c in zip(grad, clamped[1:])
                            if not c), default=0.0)
            assert residual * ref_params.cref / t_min < 1e-6

    def test_never_beaten_by_random_sizings(self, ref_params, ref_library,
                                            chain11):
        _, t_min, _ = min_delay_sizing(chain11, ref_params, ref_library)
        rng = random.Random(5)
        for _ in range(100):
            sizing = [chain11.input_cap]
            for _ in range(chain11.n - 1):
                sizing.append(math.exp(rng.uniform(math.log(2.0),
                                                   math.log(300.0))))
            timing = evaluate_path(chain11, sizing, ref_params, ref_library)
            assert t_min <= timing.total_delay * (1.0 + 1e-9)

    def test_warm_start_reaches_same_answer(self, ref_params, ref_library,
                                            chain11):
        sizing, t_min, _ = min_delay_sizing(chain11, ref_params, ref_library)
        bumped = [c * 1.3 for c in sizing]
        bumped[0] = chain11.input_cap
        warm_sizing, warm_t, warm_iters = min_delay_sizing(
            chain11, ref_params, ref_library, warm=bumped)
        assert warm_t == pytest.approx(t_min, rel=1e-9)
        assert warm_iters <= 10

    def test_appending_a_stage_to_a_staged_path_slows_it(self, ref_params,
                                                         ref_library,
                                                         chain11):
        # holds when the stage count is already at or past the optimum;
        # heavily loaded short paths instead gain, which is the entire
        # premise of buffer insertion
        _, t_base, _ = min_delay_sizing(chain11, ref_params, ref_library)
        longer = LogicPath(
            gates=chain11.gates + ("inv",), input_cap=chain11.input_cap,
            terminal_load=chain11.terminal_load,
            input_edge=chain11.input_edge,
            driver_slope_rise=chain11.driver_slope_rise,
            driver_slope_fall=chain11.driver_slope_fall)
        _, t_longer, _ = min_delay_sizing(longer, ref_params, ref_library)
        assert t_longer > t_base

    def test_appending_a_stage_to_a_short_staged_chain(self):
        path2, params, lib = ideal_chain(2, 1.0, 4.0)
        path3, _, _ = ideal_chain(3, 1.0, 4.0)
        _, t2, _ = min_delay_sizing(path2, params, lib)
        _, t3, _ = min_delay_sizing(path3, params, lib)
        assert t3 > t2

    def test_clamping_reports_floor_sizes(self, ref_params, ref_library):
        # a large fixed input driving a tiny load wants sub-minimum gates
        path = LogicPath(gates=("inv", "inv", "inv"), input_cap=50.0,
                         terminal_load=0.5)
        sizing, _, _ = min_delay_sizing(path, ref_params, ref_library)
        assert all(c >= ref_params.cref * (1.0 - 1e-12) for c in sizing[1:])
        assert any(c == pytest.approx(ref_params.cref, rel=1e-9)
                   for c in sizing[1:])

    def test_runs_out_of_iterations(self, ref_params, ref_library, chain11):
        with pytest.raises(ConvergenceError) as err:
            min_delay_sizing(chain11, ref_params, ref_library,
                             max_iterations=1)
        assert err.value.iterations == 1
        assert err.value.residual is not None

    def test_rejects_nonpositive_init(self, ref_params, ref_library,
                                      chain11):
        with pytest.raises(ValueError):
            min_delay_sizing(chain11, ref_params, ref_library, init_cref=0.0)


class TestFeasibility:
    def test_boundary_and_window(self, ref_params, ref_library, chain13):
        bounds = compute_bounds(chain13, ref_params, ref_library)
        assert bounds.t_min <= bounds.t_max
        assert feasibility(chain13, bounds.t_min, bounds)
        assert not feasibility(chain13, 0.9 * bounds.t_min, bounds)
        assert feasibility(chain13, 2.0 * bounds.t_max, bounds)

    def test_rejects_nonpositive_tc(self, ref_params, ref_library, chain13):
        bounds = compute_bounds(chain13, ref_params, ref_library)
        with pytest.raises(ValueError):
            feasibility(chain13, 0.0, bounds)
