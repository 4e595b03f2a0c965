"""Cross-check the minimum-delay solver against brute-force grid search.

Draws random short paths, solves each one with the fixed-point solver, then
minimizes the same delay by exhaustive log-grid search over the free input
caps (coarse pass, then a 400 points/decade refinement around the coarse
winner). The two should agree to a fraction of a percent; a persistent gap
on any path means the solver converged to the wrong point, not just slowly.

The grid search lives next to the test suite, so run this from the
repository root:

    python3 scripts/grid_oracle.py fixtures/ref.proc
    python3 scripts/grid_oracle.py fixtures/ref.proc --cases 20 --gates 5
"""

from __future__ import annotations

import argparse
import os
import random
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))
import oracles  # noqa: E402

from cmospath import LogicPath, load_process_file, min_delay_sizing  # noqa: E402

GAP_LIMIT = 5e-3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="compare min_delay_sizing with an exhaustive grid oracle")
    parser.add_argument("proc", help="process config file")
    parser.add_argument("--cases", type=int, default=5,
                        help="number of random paths (default 5)")
    parser.add_argument("--gates", type=int, default=4,
                        help="gates per path, first is pinned (default 4)")
    parser.add_argument("--seed", type=int, default=20260816)
    args = parser.parse_args(argv)

    if args.gates < 2:
        parser.error("--gates must be at least 2")
    if args.gates > 5:
        # 400/decade per free variable; beyond 4 free caps the refinement
        # grid stops fitting in memory
        parser.error("--gates above 5 is not tractable for the oracle")

    params, library = load_process_file(args.proc)
    kinds = sorted(library)
    rng = random.Random(args.seed)

    worst = 0.0
    failures = 0
    print(f"{'case':>4}  {'gates':<24} {'solver_ps':>10} {'grid_ps':>10} "
          f"{'gap':>9} {'oracle_s':>8}")
    for case in range(args.cases):
        gates = tuple(rng.choice(kinds) for _ in range(args.gates))
        path = LogicPath(
            gates=gates,
            input_cap=rng.uniform(2.0, 8.0),
            terminal_load=rng.uniform(30.0, 200.0),
            input_edge=rng.choice(("rising", "falling")),
            driver_slope_rise=rng.uniform(0.0, 50.0),
            driver_slope_fall=rng.uniform(0.0, 50.0),
        )
        _, t_solver, _ = min_delay_sizing(path, params, library)
        start = time.perf_counter()
        t_grid, _ = oracles.grid_min_delay(
            [library[k] for k in gates], path.input_cap, path.terminal_load,
            path.input_edge, path.driver_slope_rise, path.driver_slope_fall,
            params, lo=params.cref, hi=3.0 * path.terminal_load)
        elapsed = time.perf_counter() - start
        gap = abs(t_solver - t_grid) / t_grid
        worst = max(worst, gap)
        flag = ""
        if gap > GAP_LIMIT:
            failures += 1
            flag = "  <-- DISAGREES"
        print(f"{case:>4}  {'-'.join(gates):<24} {t_solver:>10.4f} "
              f"{t_grid:>10.4f} {gap:>9.2e} {elapsed:>8.2f}{flag}")

    print(f"# worst gap {worst:.2e} over {args.cases} cases "
          f"(limit {GAP_LIMIT:.0e})")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
