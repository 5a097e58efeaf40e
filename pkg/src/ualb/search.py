"""Best-first branch, price and remember search for UALBP-1."""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

from .bounds import lb123
from .colgen import ColumnPool, cg_lower_bound
from .heuristic import DEFAULT_GRID, HeuristicParams, enumerator, mhhu
from .instance import Instance, Station, bits, order_load, verify_solution

DEFAULT_TIME_LIMIT = 500.0
DEFAULT_MEMORY_CAP = 20_000_000


class Node:
    __slots__ = ("assigned", "m", "lb", "seq", "parent", "load", "remaining_time")

    def __init__(self, assigned: int, m: int, lb: int, seq: int, parent: "Node | None",
                 load: int, remaining_time: int):
        self.assigned = assigned
        self.m = m
        self.lb = lb
        self.seq = seq
        self.parent = parent
        self.load = load
        self.remaining_time = remaining_time

    def loads(self) -> list[int]:
        out = []
        node: Node | None = self
        while node is not None and node.parent is not None:
            out.append(node.load)
            node = node.parent
        return out[::-1]

    def stations(self, inst: Instance) -> list[Station]:
        done = 0
        out = []
        for load in self.loads():
            st = order_load(inst, done, load)
            assert st is not None
            out.append(st)
            done |= load
        return out


class Memory:
    """Hash table from assigned task set to the fewest stations seen."""

    def __init__(self, cap: int = DEFAULT_MEMORY_CAP):
        self.cap = cap
        self.table: dict[int, int] = {}
        self.full = False

    def dominated(self, assigned: int, m: int) -> bool:
        prev = self.table.get(assigned)
        return prev is not None and prev <= m

    def admit(self, assigned: int, m: int) -> None:
        prev = self.table.get(assigned)
        if prev is not None:
            if m < prev:
                self.table[assigned] = m
            return
        if len(self.table) >= self.cap:
            self.full = True
            return
        self.table[assigned] = m

    def __len__(self) -> int:
        return len(self.table)


@dataclass
class SolveReport:
    lb: int
    ub: int
    status: str  # optimal | feasible | timeout | memory_cap
    nodes_explored: int = 0
    nodes_pruned_lb123: int = 0
    nodes_pruned_cg: int = 0
    nodes_pruned_memory: int = 0
    nodes_pruned_jackson: int = 0
    columns_generated: int = 0
    wall_time: float = 0.0
    root_lb: int = 0
    mhhu_ub: int = 0
    closed_at_root: bool = False
    solution: list[Station] = field(default_factory=list)
    history: list[tuple[float, int, int]] = field(default_factory=list)


class _FitMasks:
    def __init__(self, inst: Instance):
        by_time = sorted(range(inst.n), key=lambda j: inst.t[j])
        fit = [0] * (inst.c + 1)
        acc = pos = 0
        for r in range(inst.c + 1):
            while pos < inst.n and inst.t[by_time[pos]] <= r:
                acc |= 1 << by_time[pos]
                pos += 1
            fit[r] = acc
        self.fit = fit

    def between(self, lo: int, hi: int) -> int:
        """Tasks with lo <= t <= hi."""
        if hi < lo:
            return 0
        return self.fit[hi] & ~(self.fit[lo - 1] if lo > 0 else 0)


def _fit_masks(inst: Instance) -> _FitMasks:
    fm = getattr(inst, "_fit_masks", None)
    if fm is None:
        fm = _FitMasks(inst)
        inst._fit_masks = fm
    return fm


def jackson_dominated(inst: Instance, assigned: int, load: int) -> bool:
    """True when swapping one task of ``load`` for a larger free one is no worse.

    Task ``j`` in the load is swapped for a free task ``i`` when ``i``
    ranks higher (longer, or equally long with a lower index), still fits,
    the load without ``j`` stays placeable, ``i`` is assignable on top of
    it, and either (a) every predecessor of ``j`` is already placed and
    the direct successors of ``j`` are a subset of those of ``i``, or (b)
    the mirror image with successors and predecessors exchanged. Any
    completion of the original node then maps onto one of the swapped
    node by putting ``j`` where ``i`` used to go.
    """
    t = inst.t
    fm = _fit_masks(inst)
    free = inst.full & ~(assigned | load)
    idle = inst.c - inst.time_of(load)
    ap, asu, dp, ds = inst.all_pred, inst.all_succ, inst.direct_pred, inst.direct_succ
    for j in bits(load):
        rest = load & ~(1 << j)
        base = assigned | rest
        case_f = ap[j] & ~base == 0
        case_b = asu[j] & ~base == 0
        if not (case_f or case_b):
            continue
        tj = t[j]
        cands = free & fm.between(tj, tj + idle)
        rest_ok: bool | None = None
        for i in bits(cands):
            if t[i] == tj and i > j:
                continue
            if not (ap[i] & ~base == 0 or asu[i] & ~base == 0):
                continue
            if not ((case_f and ds[j] & ~ds[i] == 0) or (case_b and dp[j] & ~dp[i] == 0)):
                continue
            if rest_ok is None:
                rest_ok = order_load(inst, assigned, rest) is not None
            if rest_ok:
                return True
            break
    return False


def branch(inst: Instance, node: Node, jackson: bool = True,
           report: SolveReport | None = None) -> list[Node]:
    """One child per maximal load of the next station, minus swap-dominated ones.

    Children carry the trivial bound ``m + 1`` and sequence number 0; the
    search fills in both.
    """
    if node.assigned == inst.full:
        raise ValueError("node has no unassigned tasks")
    out = []
    m1 = node.m + 1
    for load in enumerator(inst).maximal_loads(node.assigned):
        if jackson and jackson_dominated(inst, node.assigned, load):
            if report is not None:
                report.nodes_pruned_jackson += 1
            continue
        out.append(Node(node.assigned | load, m1, m1, 0, node, load,
                        node.remaining_time - inst.time_of(load)))
    return out


def solve(inst: Instance, time_limit: float = DEFAULT_TIME_LIMIT, memory_cap: int = DEFAULT_MEMORY_CAP,
          use_cg: bool = True, use_memory: bool = True, use_jackson: bool = True,
          grid: Sequence[HeuristicParams] = DEFAULT_GRID, child_grid: Sequence[HeuristicParams] | None = None,
          pool_capacity: int = 200_000, node_limit: int | None = None,
          on_progress: Callable[[SolveReport], None] | None = None) -> SolveReport:
    """Run the best-first search and return bounds, counters and the best solution.

    ``grid`` drives the root heuristic; ``child_grid`` (default: ``grid``)
    is used when trying to improve the upper bound at each child node.
    """
    start = time.perf_counter()
    deadline = start + time_limit
    if child_grid is None:
        child_grid = grid
    full = inst.full
    total = inst.total_time

    def elapsed() -> float:
        return time.perf_counter() - start

    report = SolveReport(lb=0, ub=inst.n, status="running")
    root_sol = mhhu(inst, 0, grid)
    assert root_sol is not None
    best = root_sol.stations
    ub = root_sol.m
    report.mhhu_ub = ub
    pool = ColumnPool(pool_capacity)
    root_loads = [st.mask for st in best]
    for mask in root_loads:
        pool.add(mask)
    root_lb = lb123(inst, full, total)
    if use_cg and root_lb < ub:
        cg = cg_lower_bound(inst, full, pool, root_loads)
        root_lb = max(root_lb, cg.lower_bound)
    root_lb = min(root_lb, ub)
    report.root_lb = root_lb
    global_lb = root_lb
    report.history.append((elapsed(), global_lb, ub))

    def finish(status: str, lb: int) -> SolveReport:
        report.lb = lb
        report.ub = ub
        report.status = status
        report.solution = best
        report.columns_generated = pool.inserted
        report.wall_time = elapsed()
        return report

    if root_lb >= ub:
        report.closed_at_root = True
        return finish("optimal", ub)

    memory = Memory(memory_cap)
    seq = itertools.count()
    root = Node(0, 0, root_lb, next(seq), None, 0, total)
    heap = [(0, root_lb, root.seq, root)]
    if use_memory:
        memory.admit(0, 0)
    timed_out = False
    interrupted: Node | None = None  # popped but not fully expanded
    while heap:
        if time.perf_counter() > deadline or (node_limit is not None and report.nodes_explored >= node_limit):
            timed_out = True
            break
        _, _, _, node = heapq.heappop(heap)
        if node.lb >= ub:
            continue
        report.nodes_explored += 1
        m1 = node.m + 1
        for child in branch(inst, node, use_jackson, report):
            assigned = child.assigned
            if assigned == full:
                if m1 < ub:
                    ub = m1
                    best = child.stations(inst)
                    for st in best:
                        pool.add(st.mask)
                    report.history.append((elapsed(), global_lb, ub))
                continue
            if use_memory and memory.dominated(assigned, m1):
                report.nodes_pruned_memory += 1
                continue
            unassigned = full & ~assigned
            lb = m1 + lb123(inst, unassigned, child.remaining_time)
            if lb >= ub:
                report.nodes_pruned_lb123 += 1
                continue
            if use_cg:
                cg = cg_lower_bound(inst, unassigned, pool, [st.mask for st in best], target=ub - m1)
                lb = max(lb, m1 + cg.lower_bound)
                if lb >= ub:
                    report.nodes_pruned_cg += 1
                    continue
            child.lb = lb
            child.seq = next(seq)
            sol = mhhu(inst, assigned, child_grid, max_stations=ub - m1 - 1)
            if sol is not None and m1 + sol.m < ub:
                ub = m1 + sol.m
                best = child.stations(inst) + sol.stations
                for st in best:
                    pool.add(st.mask)
                report.history.append((elapsed(), global_lb, ub))
            if lb >= ub:
                continue
            heapq.heappush(heap, (-m1, lb, child.seq, child))
            if use_memory:
                memory.admit(assigned, m1)
            if time.perf_counter() > deadline:
                interrupted = node
                timed_out = True
                break
        if timed_out:
            break
        if on_progress is not None:
            on_progress(report)
    if not heap and not timed_out:
        return finish("optimal", ub)
    open_lbs = [entry[3].lb for entry in heap]
    if interrupted is not None:
        open_lbs.append(interrupted.lb)
    open_lb = min(open_lbs, default=ub)
    global_lb = min(ub, max(global_lb, open_lb))
    report.history.append((elapsed(), global_lb, ub))
    if global_lb >= ub:
        return finish("optimal", ub)
    status = "memory_cap" if memory.full else "timeout"
    return finish(status, global_lb)


# -- exhaustive oracle ---------------------------------------------------------

def oracle_solve(inst: Instance) -> int:
    """Exact optimum by DP over assigned sets and every feasible station load.

    Independent of the search: loads are grown one task at a time from the
    full closures, with no maximality or dominance filtering.
    """
    if inst.n > 12:
        raise ValueError(f"oracle limited to n <= 12, got {inst.n}")
    full = inst.full
    ap, asu, t, c = inst.all_pred, inst.all_succ, inst.t, inst.c

    def loads_at(assigned: int) -> set[int]:
        seen = {0}
        stack = [(0, 0)]
        while stack:
            load, time_used = stack.pop()
            done = assigned | load
            for j in range(inst.n):
                if done >> j & 1 or time_used + t[j] > c:
                    continue
                if ap[j] & ~done and asu[j] & ~done:
                    continue
                nxt = load | 1 << j
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, time_used + t[j]))
        seen.discard(0)
        return seen

    @lru_cache(maxsize=None)
    def best(assigned: int) -> int:
        if assigned == full:
            return 0
        return 1 + min(best(assigned | load) for load in loads_at(assigned))

    return best(0)


def check_solution(inst: Instance, stations: Sequence[Station]) -> None:
    ok, msg = verify_solution(inst, stations)
    if not ok:
        raise AssertionError(msg)
