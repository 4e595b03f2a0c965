"""Constraint classification and the route-selection optimizer.

The final sizing of every optimize() call is re-evaluated through the
independent delay oracle, so a solution that only looks feasible to the
package's own model cannot slip through.
"""

import pytest

import oracles
from cmospath.bounds import min_delay_sizing
from cmospath.errors import InfeasibleError
from cmospath.path import LogicPath
from cmospath.protocol import (Domain, TraceStep, classify_constraint,
                               optimize, replay_trace)
from cmospath.sizing import distribute_constraint


def oracle_delay(path, sizing, params, library):
    templates = [library[k] for k in path.gates]
    total, _, _ = oracles.chain_delay(
        templates, list(sizing), path.terminal_load, path.input_edge,
        path.driver_slope_rise, path.driver_slope_fall, params)
    return total


def check_result(res, path, tc, params, library):
    """Invariants every successful optimization must satisfy."""
    got = oracle_delay(res.final_path, res.sizing, params, library)
    assert got == pytest.approx(res.achieved_delay, rel=1e-9)
    assert got <= tc * (1.0 + 1e-3)
    assert res.a_value <= 0.0
    replayed = replay_trace(path, res.trace, library)
    assert replayed.gates == res.final_path.gates


class TestClassify:
    def test_the_four_domains(self, ref_params):
        cases = ((0.9, Domain.INFEASIBLE), (1.1, Domain.HARD),
                 (2.0, Domain.MEDIUM), (3.0, Domain.WEAK))
        for ratio, expected in cases:
            dom = classify_constraint(ratio * 100.0, 100.0, ref_params)
            assert dom.kind is expected
            assert dom.ratio == pytest.approx(ratio)

    def test_boundaries_fall_toward_the_harder_domain(self, ref_params):
        assert classify_constraint(100.0, 100.0,
                                   ref_params).kind is Domain.HARD
        assert classify_constraint(120.0, 100.0,
                                   ref_params).kind is Domain.HARD
        assert classify_constraint(250.0, 100.0,
                                   ref_params).kind is Domain.MEDIUM

    def test_rejects_nonpositive(self, ref_params):
        with pytest.raises(ValueError):
            classify_constraint(0.0, 100.0, ref_params)
        with pytest.raises(ValueError):
            classify_constraint(100.0, 0.0, ref_params)


class TestTraceStep:
    def test_line_format(self):
        step = TraceStep("classify", {"domain": "hard", "ratio": 1.25})
        assert step.line() == "step=classify detail=<domain=hard ratio=1.25>"

    def test_floats_are_compact(self):
        step = TraceStep("bounds", {"t_min": 586.747656})
        assert step.line() == "step=bounds detail=<t_min=586.748>"


class TestWeakDomain:
    def test_pure_sizing_no_structure_change(self, ref_params, ref_library,
                                             chain11):
        _, t_min, _ = min_delay_sizing(chain11, ref_params, ref_library)
        tc = 3.0 * t_min
        res = optimize(chain11, tc, ref_params, ref_library)
        assert res.domain.kind is Domain.WEAK
        assert res.final_path.gates == chain11.gates
        assert [s.kind for s in res.trace] == ["bounds", "classify",
                                               "distribute"]
        check_result(res, chain11, tc, ref_params, ref_library)

    def test_saturated_constraint_notes_it(self, ref_params, ref_library,
                                           chain11):
        # past t_max every gate is already minimum size
        _, t_min, _ = min_delay_sizing(chain11, ref_params, ref_library)
        res = optimize(chain11, 6.0 * t_min, ref_params, ref_library)
        assert res.notes
        assert all(c == pytest.approx(ref_params.cref)
                   for c in res.sizing[1:])


class TestMediumDomain:
    def test_buffering_rejected_on_measured_area(self, ref_params,
                                                 ref_library, heavy_path):
        _, t_min, _ = min_delay_sizing(heavy_path, ref_params, ref_library)
        tc = 2.0 * t_min
        res = optimize(heavy_path, tc, ref_params, ref_library)
        assert res.domain.kind is Domain.MEDIUM
        kinds = [s.kind for s in res.trace]
        assert "buffering_rejected" in kinds or "buffering_kept" in kinds
        check_result(res, heavy_path, tc, ref_params, ref_library)

    def test_rejection_keeps_the_original_structure(self, ref_params,
                                                    ref_library, heavy_path):
        _, t_min, _ = min_delay_sizing(heavy_path, ref_params, ref_library)
        res = optimize(heavy_path, 2.0 * t_min, ref_params, ref_library)
        rejected = [s for s in res.trace if s.kind == "buffering_rejected"]
        if rejected:
            assert res.final_path.gates == heavy_path.gates
            assert rejected[0].data["area_with"] > \
                rejected[0].data["area_without"]


class TestHardDomain:
    def test_buffers_then_beats_sizing_only(self, ref_params, ref_library,
                                            heavy_path):
        _, t_min, _ = min_delay_sizing(heavy_path, ref_params, ref_library)
        tc = 1.1 * t_min
        res = optimize(heavy_path, tc, ref_params, ref_library)
        assert res.domain.kind is Domain.HARD
        assert any(s.kind == "insert_buffer" for s in res.trace)
        assert len(res.final_path.gates) > len(heavy_path.gates)
        only = distribute_constraint(heavy_path, tc, ref_params, ref_library)
        assert res.area < only.area
        check_result(res, heavy_path, tc, ref_params, ref_library)

    def test_buffering_can_be_disabled(self, ref_params, ref_library,
                                       heavy_path):
        _, t_min, _ = min_delay_sizing(heavy_path, ref_params, ref_library)
        tc = 1.1 * t_min
        res = optimize(heavy_path, tc, ref_params, ref_library,
                       allow_buffer=False)
        assert res.final_path.gates == heavy_path.gates
        assert not any(s.kind == "insert_buffer" for s in res.trace)
        only = distribute_constraint(heavy_path, tc, ref_params, ref_library)
        assert res.area == pytest.approx(only.area, rel=1e-9)

    def test_single_mode_buffers_record_flips(self, ref_params, ref_library,
                                              heavy_path):
        _, t_min, _ = min_delay_sizing(heavy_path, ref_params, ref_library)
        tc = 1.1 * t_min
        res = optimize(heavy_path, tc, ref_params, ref_library,
                       buffer_mode="single")
        inserted = [s for s in res.trace if s.kind == "insert_buffer"]
        assert res.final_path.polarity_flips == len(inserted)
        check_result(res, heavy_path, tc, ref_params, ref_library)


class TestInfeasibleDomain:
    def test_restructures_the_weak_gate_and_succeeds(self, ref_params,
                                                     ref_library, chain11):
        _, t_min, _ = min_delay_sizing(chain11, ref_params, ref_library)
        tc = 0.95 * t_min
        res = optimize(chain11, tc, ref_params, ref_library)
        assert res.domain.kind is Domain.INFEASIBLE
        restructs = [s for s in res.trace if s.kind == "restruct"]
        assert restructs
        assert restructs[0].data["from"] == "nor2"
        assert restructs[0].data["equivalent"] is True
        assert any(s.kind == "route" for s in res.trace)
        check_result(res, chain11, tc, ref_params, ref_library)

    def test_rewritten_path_is_logically_identical(self, ref_params,
                                                   ref_library, chain11):
        _, t_min, _ = min_delay_sizing(chain11, ref_params, ref_library)
        res = optimize(chain11, 0.95 * t_min, ref_params, ref_library)
        before = oracles.path_truth_table(chain11, ref_library)
        after = oracles.path_truth_table(res.final_path, ref_library)
        assert before == after

    def test_unreachable_constraint_raises_with_context(self, ref_params,
                                                        ref_library):
        path = LogicPath(gates=("inv",) * 4, input_cap=4.0,
                         terminal_load=80.0, driver_slope_rise=20.0,
                         driver_slope_fall=20.0)
        _, t_min, _ = min_delay_sizing(path, ref_params, ref_library)
        with pytest.raises(InfeasibleError) as excinfo:
            optimize(path, 0.9 * t_min, ref_params, ref_library)
        err = excinfo.value
        assert err.t_min == pytest.approx(t_min, rel=1e-9)
        assert err.best_path is not None
        assert err.trace

    def test_restruct_only_route(self, ref_params, ref_library, chain11):
        _, t_min, _ = min_delay_sizing(chain11, ref_params, ref_library)
        tc = 0.95 * t_min
        res = optimize(chain11, tc, ref_params, ref_library,
                       allow_buffer=False)
        assert any(s.kind == "restruct" for s in res.trace)
        assert not any(s.kind == "insert_buffer" for s in res.trace)
        check_result(res, chain11, tc, ref_params, ref_library)

    def test_everything_disabled_raises(self, ref_params, ref_library,
                                        chain11):
        _, t_min, _ = min_delay_sizing(chain11, ref_params, ref_library)
        with pytest.raises(InfeasibleError):
            optimize(chain11, 0.95 * t_min, ref_params, ref_library,
                     allow_buffer=False, allow_restruct=False)


class TestGlobalProperties:
    def test_idempotent_on_its_own_output(self, ref_params, ref_library,
                                          heavy_path):
        _, t_min, _ = min_delay_sizing(heavy_path, ref_params, ref_library)
        tc = 1.1 * t_min
        first = optimize(heavy_path, tc, ref_params, ref_library)
        second = optimize(first.final_path, tc, ref_params, ref_library)
        assert second.area <= first.area * (1.0 + 1e-3)

    def test_tighter_constraints_cost_area(self, ref_params, ref_library,
                                           chain11):
        _, t_min, _ = min_delay_sizing(chain11, ref_params, ref_library)
        areas = [optimize(chain11, r * t_min, ref_params, ref_library).area
                 for r in (1.1, 1.5, 2.0, 3.0)]
        assert areas == sorted(areas, reverse=True)
