"""Modified Hoffmann heuristic for U-lines (MHHU).

Stations are filled one at a time with the best-scoring maximal load,
where each task scores ``t + alpha*w + beta*|direct successors| - gamma``
when placed forward and ``t + alpha*wb + beta*|direct predecessors| - gamma``
when placed backward.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import _pykernels
from .instance import BACKWARD, FORWARD, Instance, Load, Station, bits
from .kernels import LoadEnumerator


@dataclass(frozen=True)
class HeuristicParams:
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    load_cap: int = 50_000

    def __post_init__(self) -> None:
        if self.load_cap < 1:
            raise ValueError("load_cap must be at least 1")


DEFAULT_GRID: tuple[HeuristicParams, ...] = tuple(
    HeuristicParams(a, b, g)
    for a, b, g in itertools.product((0.0, 0.01, 0.02), (0.0, 0.01), (0.0, 0.02))
)


@dataclass
class Solution:
    stations: list[Station]

    @property
    def m(self) -> int:
        return len(self.stations)

    def loads(self, inst: Instance) -> list[Load]:
        return [st.load(inst) for st in self.stations]


@dataclass(frozen=True)
class ScoredLoad:
    load: Load
    station: Station
    score: float


def _adjacency(inst: Instance) -> tuple[list[list[int]], list[list[int]]]:
    return ([list(bits(p)) for p in inst.direct_pred],
            [list(bits(s)) for s in inst.direct_succ])


def enumerator(inst: Instance):
    """The instance's cached load enumerator (compiled when available)."""
    enum = getattr(inst, "_enumerator", None)
    if enum is None:
        preds, succs = _adjacency(inst)
        enum = LoadEnumerator(list(inst.t), inst.c, preds, succs)
        inst._enumerator = enum
    return enum


def contributions(inst: Instance, params: HeuristicParams) -> tuple[list[float], list[float]]:
    """Per-task score when placed forward and when placed backward."""
    a, b, g = params.alpha, params.beta, params.gamma
    fc = [inst.t[j] + a * inst.w[j] + b * inst.direct_succ[j].bit_count() - g for j in range(inst.n)]
    bc = [inst.t[j] + a * inst.wb[j] + b * inst.direct_pred[j].bit_count() - g for j in range(inst.n)]
    return fc, bc


def _station(order: Sequence[int], dirs: Sequence[int]) -> Station:
    return Station(tuple(order), tuple(FORWARD if d == 0 else BACKWARD for d in dirs))


def enumerate_loads(inst: Instance, assigned: int, params: HeuristicParams) -> list[ScoredLoad]:
    """Every maximal load at ``assigned`` (up to ``params.load_cap``), scored."""
    preds, succs = _adjacency(inst)
    enum = _pykernels.LoadEnumerator(list(inst.t), inst.c, preds, succs)
    fc, bc = contributions(inst, params)
    out: list[ScoredLoad] = []

    def leaf(load, order, dirs, score):
        st = _station(order, dirs)
        out.append(ScoredLoad(Load(load, inst.time_of(load)), st, score))

    enum._walk(assigned, fc, bc, params.load_cap, leaf)
    return out


def complete(inst: Instance, start: int, params: HeuristicParams,
             max_stations: int | None = None) -> list[Station] | None:
    """Greedy completion from ``start``; None once ``max_stations`` is exceeded."""
    enum = enumerator(inst)
    fc, bc = contributions(inst, params)
    stations: list[Station] = []
    assigned = start
    while assigned != inst.full:
        if max_stations is not None and len(stations) >= max_stations:
            return None
        mask, _, order, dirs, _ = enum.best_load(assigned, fc, bc, params.load_cap)
        if mask == 0:
            raise RuntimeError(f"no assignable task at state {assigned:#x}")
        stations.append(_station(order, dirs))
        assigned |= mask
    return stations


def mhhu(inst: Instance, start: int = 0, params_grid: Iterable[HeuristicParams] = DEFAULT_GRID,
         prefix: Sequence[Station] = (), max_stations: int | None = None) -> Solution | None:
    """Best greedy completion over the parameter grid (fewest stations, first wins).

    ``prefix`` holds stations already fixed by the caller; they are
    prepended to the result. With ``max_stations`` set, completions that
    would need more stations than that are abandoned and ``None`` is
    returned if none fits.
    """
    best: list[Station] | None = None
    limit = max_stations
    for params in params_grid:
        stations = complete(inst, start, params, limit)
        if stations is None:
            continue
        if best is None or len(stations) < len(best):
            best = stations
            limit = len(stations) - 1
            if limit < 0:
                break
    if best is None:
        return None
    return Solution(list(prefix) + best)

