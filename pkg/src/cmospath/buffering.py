"""Fanout limits and buffer insertion.

A gate kind has a characteristic fanout beyond which handing its load to
an optimally sized buffer is faster than driving the load directly.  That
crossing, measured on a two-gate probe structure, depends only on the
loaded gate, the buffer kind, and the process: the driving stage
contributes identically to both alternatives.  Nodes whose effective
fanout exceeds the limit of their driving gate are where insertion pays;
insertion is accepted greedily, worst node first, only while the global
minimum delay keeps improving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bounds import min_delay_sizing
from .errors import ConfigError
from .path import GateLibrary, LogicPath, PathModel, Sizing
from .process import EDGES, ProcessParams

FLIMIT_LO = 1.0
FLIMIT_HI = 100.0
FLIMIT_TOL = 1e-3
IMPROVE_TOL = 1e-3
MAX_INSERTIONS = 32


@dataclass(frozen=True)
class FanoutLimit:
    """Break-even fanout of a (driver, gate) pair; inf when none in range."""

    driver: str
    gate: str
    f_limit: float

    def __post_init__(self):
        if not self.f_limit > 1.0:
            raise ValueError("f_limit must exceed 1")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.f_limit)


def optimal_buffer_size(a_gate: float, cin_gate: float, a_buf: float,
                        c_par_buf_coeff: float, load: float,
                        params: ProcessParams) -> float:
    """Buffer input capacitance minimizing the frozen two-stage delay.

    Stationarity of a_gate * C_buf / cin_gate + a_buf * load / C_buf gives
    C_buf = sqrt(a_buf * load * cin_gate / a_gate); one re-freeze folds the
    buffer's own parasitic back into its load.  Clamped at cref.
    """
    if min(a_gate, a_buf, cin_gate, load) <= 0:
        raise ValueError("coefficients, cin_gate, and load must be positive")
    c0 = math.sqrt(a_buf * load * cin_gate / a_gate)
    c1 = math.sqrt(a_buf * (load + c_par_buf_coeff * c0) * cin_gate / a_gate)
    return max(c1, params.cref)


def _probe_paths(driver: str, gate: str, buffer_kind: str, cin: float,
                 fanout: float, edge: str) -> tuple[LogicPath, LogicPath]:
    common = dict(input_cap=cin, terminal_load=fanout * cin,
                  input_edge=edge, driver_slope_rise=0.0,
                  driver_slope_fall=0.0)
    return (LogicPath(gates=(driver, gate), **common),
            LogicPath(gates=(driver, gate, buffer_kind), **common))


def _buffered_probe_delay(model: PathModel, cin: float, load: float,
                          params: ProcessParams) -> float:
    """Delay of the 3-gate probe with its buffer optimally sized."""
    p_buf = model.templates[2].par_coeff
    c_buf = max(params.cref, math.sqrt(cin * load))
    for _ in range(6):
        coeffs = model.coefficients((cin, cin, c_buf))
        new = optimal_buffer_size(coeffs.a[1], cin, coeffs.a[2], p_buf,
                                  load, params)
        if abs(new - c_buf) <= 1e-9 * c_buf:
            c_buf = new
            break
        c_buf = new
    return model.evaluate((cin, cin, c_buf)).total_delay


def flimit(driver: str, gate: str, params: ProcessParams,
           library: GateLibrary, buffer_kind: str = "inv") -> FanoutLimit:
    """Break-even fanout of `gate` under `driver`, probed in [1, 100].

    Compares the plain two-gate structure against the same structure with
    an optimally sized buffer appended, full chained delays averaged over
    both input polarities, and bisects the crossing to 1e-3 absolute.
    Returns f_limit = inf when the buffered structure never wins in range.
    """
    for kind in (driver, gate, buffer_kind):
        if kind not in library:
            raise ConfigError(f"unknown gate kind: {kind}")
    cin = 64.0 * params.cref

    models: list[tuple[PathModel, PathModel]] = []
    for edge in EDGES:
        plain, buffered = _probe_paths(driver, gate, buffer_kind, cin, 2.0, edge)
        models.append((PathModel(plain, params, library),
                       PathModel(buffered, params, library)))

    def gap(fanout: float) -> float:
        load = fanout * cin
        total = 0.0
        for plain_model, buf_model in models:
            plain_model.terminal_load = load
            buf_model.terminal_load = load
            d_plain = plain_model.evaluate((cin, cin)).total_delay
            d_buf = _buffered_probe_delay(buf_model, cin, load, params)
            total += d_buf - d_plain
        return total / len(models)

    lo, hi = FLIMIT_LO, FLIMIT_HI
    g_lo = gap(lo)
    g_hi = gap(hi)
    if g_lo <= 0.0:
        # Buffering already wins at unit fanout; the limit degenerates.
        return FanoutLimit(driver, gate, 1.0 + FLIMIT_TOL)
    if g_hi > 0.0:
        return FanoutLimit(driver, gate, math.inf)
    while hi - lo > FLIMIT_TOL:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return FanoutLimit(driver, gate, 0.5 * (lo + hi))


def flimit_table(params: ProcessParams, library: GateLibrary,
                 buffer_kind: str = "inv") -> dict[tuple[str, str], FanoutLimit]:
    """Fanout limits for the full driver x gate matrix of the library."""
    table: dict[tuple[str, str], FanoutLimit] = {}
    for driver in library:
        for gate in library:
            table[(driver, gate)] = flimit(driver, gate, params, library,
                                           buffer_kind)
    return table


class FlimitCache:
    """Lazy fanout-limit lookup keyed by (driver_kind, gate_kind)."""

    def __init__(self, params: ProcessParams, library: GateLibrary,
                 buffer_kind: str = "inv"):
        self.params = params
        self.library = library
        self.buffer_kind = buffer_kind
        self._table: dict[tuple[str, str], FanoutLimit] = {}

    def __getitem__(self, key: tuple[str, str]) -> FanoutLimit:
        if key not in self._table:
            driver, gate = key
            self._table[key] = flimit(driver, gate, self.params,
                                      self.library, self.buffer_kind)
        return self._table[key]


def find_critical_nodes(path: LogicPath, sizing, limits,
                        params: ProcessParams, library: GateLibrary,
                        buffer_kind: str = "inv") -> list[int]:
    """Gate indices whose effective fanout exceeds their kind's limit.

    Effective fanout of gate i is (next cin + own parasitic) / cin[i]; the
    applicable limit is looked up under the gate's actual driver (the
    buffer kind stands in for the external driver of gate 0).  Sorted by
    overshoot ratio, worst first.
    """
    model = PathModel(path, params, library)
    model.check_sizing(sizing)
    flagged: list[tuple[float, int]] = []
    for i in range(model.n):
        nxt = sizing[i + 1] if i < model.n - 1 else model.terminal_load
        fanout = (nxt + model._par[i] * sizing[i]) / sizing[i]
        driver = path.gates[i - 1] if i > 0 else buffer_kind
        limit = limits[(driver, path.gates[i])].f_limit
        if math.isfinite(limit) and fanout > limit:
            flagged.append((fanout / limit, i))
    flagged.sort(key=lambda item: (-item[0], item[1]))
    return [i for _, i in flagged]


def insert_buffers(path: LogicPath, node_indices, buffer_kind: str = "inv",
                   polarity_mode: str = "pair") -> LogicPath:
    """Insert buffers after the given gate indices.

    ``pair`` mode adds two inverters (polarity preserving), ``single``
    adds one and records the net inversion on the path.  New gates enter
    unsized (minimum drive until the next global resize).
    """
    if polarity_mode not in ("single", "pair"):
        raise ValueError(f"bad polarity_mode: {polarity_mode!r}")
    indices = sorted(set(node_indices))
    if not indices:
        return path
    if indices[0] < 0 or indices[-1] >= path.n:
        raise ValueError("buffer insertion index out of range")

    count = 1 if polarity_mode == "single" else 2
    gates = list(path.gates)
    seeds = list(path.seed_cin) if path.seed_cin is not None else [None] * path.n
    flags = list(path.side_inverted) if path.side_inverted is not None else [False] * path.n
    for i in reversed(indices):
        gates[i + 1:i + 1] = [buffer_kind] * count
        seeds[i + 1:i + 1] = [None] * count
        flags[i + 1:i + 1] = [False] * count
    return LogicPath(
        gates=tuple(gates),
        input_cap=path.input_cap,
        terminal_load=path.terminal_load,
        input_edge=path.input_edge,
        driver_slope_rise=path.driver_slope_rise,
        driver_slope_fall=path.driver_slope_fall,
        seed_cin=tuple(seeds) if any(s is not None for s in seeds) else None,
        side_inverted=tuple(flags) if any(flags) else None,
        offpath_inverters=path.offpath_inverters,
        polarity_flips=path.polarity_flips + (len(indices) if count == 1 else 0),
    )


@dataclass(frozen=True)
class BufferingOutcome:
    """Result of greedy insertion with global resizing."""

    path: LogicPath
    sizing: Sizing
    t_min: float
    insertions: tuple[tuple[int, str], ...]  # (index in the path it was applied to, mode)


def min_delay_with_buffers(path: LogicPath, params: ProcessParams,
                           library: GateLibrary, buffer_kind: str = "inv",
                           polarity_mode: str = "pair",
                           limits=None) -> BufferingOutcome:
    """Greedy buffer insertion: worst over-limit node, one at a time.

    After each tentative insertion the whole path is resized for minimum
    delay; the insertion sticks only if it improves t_min by at least
    0.1%.  Stops when no node is over its limit or the gain dries up.
    Never returns a slower path than the input.
    """
    if limits is None:
        limits = FlimitCache(params, library, buffer_kind)
    current = path
    sizing, t_min, _ = min_delay_sizing(current, params, library)
    steps: list[tuple[int, str]] = []
    for _ in range(MAX_INSERTIONS):
        nodes = find_critical_nodes(current, sizing, limits, params, library,
                                    buffer_kind)
        accepted = False
        for node in nodes:
            candidate = insert_buffers(current, [node], buffer_kind,
                                       polarity_mode)
            cand_sizing, cand_t, _ = min_delay_sizing(candidate, params, library)
            if cand_t < t_min * (1.0 - IMPROVE_TOL):
                steps.append((node, polarity_mode))
                current, sizing, t_min = candidate, cand_sizing, cand_t
                accepted = True
                break
        if not accepted:
            break
    return BufferingOutcome(path=current, sizing=sizing, t_min=t_min,
                            insertions=tuple(steps))
