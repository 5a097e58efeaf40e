"""Column-generation lower bound with a cross-node column pool."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .bounds import lb1_value
from .instance import Instance, Load, bits
from .knapsack import solve_pricing
from .master import MasterProblem

CEIL_TOL = 1e-6
RC_TOL = 1e-6
POOL_BATCH = 25


def ceil_tol(x: float) -> int:
    return math.ceil(x - CEIL_TOL)


class ColumnPool:
    """Deduplicated loads shared across search nodes, evicted LRU on overflow.

    Member indices are kept flattened so reduced costs of every pooled
    column can be priced against a dual vector in one ``reduceat`` call.
    """

    def __init__(self, capacity: int = 200_000):
        if capacity < 1:
            raise ValueError("pool capacity must be positive")
        self.capacity = capacity
        self._masks: list[int] = []
        self._members: list[np.ndarray] = []
        self._last_used: list[int] = []
        self._slot: dict[int, int] = {}
        self._clock = 0
        self.inserted = 0
        self.evicted = 0
        self._flat: np.ndarray | None = None
        self._starts: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self._masks)

    def __contains__(self, mask: int) -> bool:
        return mask in self._slot

    def loads(self) -> list[int]:
        return list(self._masks)

    def add(self, load: Load | int) -> bool:
        mask = load.tasks if isinstance(load, Load) else int(load)
        if mask == 0 or mask in self._slot:
            return False
        if len(self._masks) >= self.capacity:
            self._evict(max(1, self.capacity // 10))
        self._clock += 1
        self._slot[mask] = len(self._masks)
        self._masks.append(mask)
        self._members.append(np.fromiter(bits(mask), dtype=np.intp))
        self._last_used.append(self._clock)
        self.inserted += 1
        self._flat = None
        return True

    def touch(self, mask: int) -> None:
        slot = self._slot.get(mask)
        if slot is not None:
            self._clock += 1
            self._last_used[slot] = self._clock

    def _evict(self, count: int) -> None:
        order = np.argsort(np.asarray(self._last_used), kind="stable")
        drop = set(order[:count].tolist())
        keep = [k for k in range(len(self._masks)) if k not in drop]
        self._masks = [self._masks[k] for k in keep]
        self._members = [self._members[k] for k in keep]
        self._last_used = [self._last_used[k] for k in keep]
        self._slot = {mask: k for k, mask in enumerate(self._masks)}
        self.evicted += len(drop)
        self._flat = None

    def dual_values(self, pi: np.ndarray) -> np.ndarray:
        """Sum of ``pi`` over each pooled load (tasks outside the rows carry 0)."""
        if not self._masks:
            return np.zeros(0)
        if self._flat is None:
            self._flat = np.concatenate(self._members)
            lengths = np.fromiter((len(a) for a in self._members), dtype=np.intp, count=len(self._members))
            self._starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
        return np.add.reduceat(pi[self._flat], self._starts)

    def best_columns(self, pi: np.ndarray, limit: int, tol: float = RC_TOL) -> list[int]:
        """Up to ``limit`` pooled loads with the most negative reduced cost."""
        vals = self.dual_values(pi)
        if vals.size == 0:
            return []
        hits = np.nonzero(vals > 1.0 + tol)[0]
        if hits.size == 0:
            return []
        if hits.size > limit:
            hits = hits[np.argpartition(-vals[hits], limit - 1)[:limit]]
        hits = hits[np.lexsort((hits, -vals[hits]))]
        out = [self._masks[k] for k in hits]
        for mask in out:
            self.touch(mask)
        return out


@dataclass
class CgResult:
    lower_bound: int
    lpm_value: float
    iterations: int
    terminated_by: str  # converged | lemma1 | iteration_cap | target
    lp_solves: int = 0
    columns_added: int = 0
    trace: list[tuple[float, float]] = field(default_factory=list)


def cg_lower_bound(inst: Instance, unassigned: int, pool: ColumnPool | None = None,
                   seed_loads: Iterable[Load | int] = (), *, target: int | None = None,
                   max_iter: int = 1000) -> CgResult:
    """Station lower bound for ``unassigned`` from the bin-packing LP relaxation.

    Knapsack pricing is exact, so every round yields the valid dual bound
    ``v(RLPM) / max_value``. The loop stops when no column prices out,
    when that bound and ``v(RLPM)`` round up to the same integer, or, with
    ``target`` set, as soon as the dual bound reaches ``target`` (the
    caller only needs to know the node can be pruned). When the seed
    loads, restricted to ``unassigned``, are pairwise disjoint they give
    the simplex a feasible starting basis. Before each
    knapsack call, pooled columns with negative reduced cost are fed to
    the master. ``trace`` records ``(v(RLPM), max_value)`` per knapsack
    round.
    """
    if unassigned == 0:
        return CgResult(0, 0.0, 0, "converged")
    if pool is None:
        pool = ColumnPool()
    floor_lb = lb1_value(inst, unassigned)
    mp = MasterProblem(bits(unassigned))
    seeds = [load.tasks if isinstance(load, Load) else int(load) for load in seed_loads]
    for mask in seeds:
        mp.add_column(mask)
    covered = 0
    for mask in mp.columns:
        covered |= mask
    missing = [1 << j for j in bits(unassigned & ~covered)]
    for mask in missing:
        mp.add_column(mask)
    mp.crash(seeds + missing)
    pi = np.zeros(inst.n)
    rows = np.asarray(mp.rows, dtype=np.intp)
    best_dual = 0
    lp_solves = 0
    added = 0
    trace: list[tuple[float, float]] = []
    iterations = 0
    while True:
        sol = mp.solve()
        lp_solves += 1
        pi[:] = 0.0
        pi[rows] = [sol.duals[j] for j in mp.rows]
        from_pool = [mask for mask in pool.best_columns(pi, POOL_BATCH) if mask & unassigned]
        fresh = sum(mp.add_column(mask) for mask in from_pool)
        if fresh:
            continue
        if iterations >= max_iter:
            lb = max(best_dual, floor_lb)
            return CgResult(lb, sol.objective, iterations, "iteration_cap", lp_solves, added, trace)
        iterations += 1
        price = solve_pricing(inst, unassigned, pi)
        value = max(price.value, price.best)
        trace.append((sol.objective, value))
        v_ceil = ceil_tol(sol.objective)
        if 1.0 - value >= -RC_TOL:
            lb = max(v_ceil, best_dual, floor_lb)
            return CgResult(lb, sol.objective, iterations, "converged", lp_solves, added, trace)
        dual_ceil = ceil_tol(sol.objective / value)
        best_dual = max(best_dual, dual_ceil)
        if v_ceil == dual_ceil:
            return CgResult(max(dual_ceil, floor_lb), sol.objective, iterations, "lemma1",
                            lp_solves, added, trace)
        if target is not None and max(best_dual, floor_lb) >= target:
            return CgResult(max(best_dual, floor_lb), sol.objective, iterations, "target",
                            lp_solves, added, trace)
        pool.add(price.load)
        if not mp.add_column(price.load):
            # Pricing returned a column already in the master: LP noise.
            return CgResult(max(best_dual, floor_lb), sol.objective, iterations, "iteration_cap",
                            lp_solves, added, trace)
        added += 1
