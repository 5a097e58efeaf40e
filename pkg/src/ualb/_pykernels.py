"""Pure-Python (numpy) implementations of the hot kernels.

These mirror ``_ckernels.pyx`` operation for operation so both backends
produce identical results, including tie-breaking and float summation
order.
"""

from __future__ import annotations

import sys
from typing import Sequence

import numpy as np

TIE_EPS = 1e-12


def knapsack_max(weights: Sequence[int], values: Sequence[float], capacity: int) -> tuple[float, list[int]]:
    """0/1 knapsack by capacity-indexed DP.

    Returns ``(best, chosen)`` where ``chosen`` are positions into the
    inputs. Among near-equal optima, earlier items are preferred.
    """
    k_items = len(weights)
    if k_items == 0 or capacity <= 0:
        return 0.0, []
    dp = np.zeros(capacity + 1)
    keep = np.zeros((k_items, capacity + 1), dtype=bool)
    for k in range(k_items - 1, -1, -1):
        wk = int(weights[k])
        if wk > capacity:
            continue
        vk = float(values[k])
        skip = dp[wk:]
        take = dp[: capacity + 1 - wk] + vk
        keep[k, wk:] = take >= skip - TIE_EPS
        dp[wk:] = np.maximum(skip, take)
    chosen = []
    w = capacity
    for k in range(k_items):
        if keep[k, w]:
            chosen.append(k)
            w -= int(weights[k])
    return float(dp[capacity]), chosen


class LoadEnumerator:
    """Depth-first enumeration of maximal U-line station loads.

    The search branches on the lowest-indexed assignable task that fits:
    first include it, then forbid it. Availability is tracked with
    counters of unassigned direct predecessors/successors. Each feasible
    load set is reached exactly once; a leaf is emitted only when no
    assignable task (forbidden ones included) fits the idle time.
    """

    def __init__(self, times: Sequence[int], capacity: int,
                 preds: Sequence[Sequence[int]], succs: Sequence[Sequence[int]]):
        self.n = len(times)
        self.t = [int(x) for x in times]
        self.c = int(capacity)
        self.preds = [list(p) for p in preds]
        self.succs = [list(s) for s in succs]
        self.pred_mask = [sum(1 << i for i in p) for p in self.preds]
        self.succ_mask = [sum(1 << i for i in s) for s in self.succs]
        by_time = sorted(range(self.n), key=lambda j: self.t[j])
        fit = [0] * (self.c + 1)
        acc = 0
        pos = 0
        for r in range(self.c + 1):
            while pos < self.n and self.t[by_time[pos]] <= r:
                acc |= 1 << by_time[pos]
                pos += 1
            fit[r] = acc
        self.fit = fit
        self.full = (1 << self.n) - 1

    def _walk(self, assigned: int, fcontrib, bcontrib, cap, on_leaf) -> int:
        n = self.n
        free = self.full & ~assigned
        if not free:
            return 0
        t, fit, preds, succs = self.t, self.fit, self.preds, self.succs
        predleft = [(self.pred_mask[j] & ~assigned).bit_count() for j in range(n)]
        succleft = [(self.succ_mask[j] & ~assigned).bit_count() for j in range(n)]
        fwd = bwd = 0
        for j in range(n):
            if free >> j & 1:
                if predleft[j] == 0:
                    fwd |= 1 << j
                if succleft[j] == 0:
                    bwd |= 1 << j
        order: list[int] = []
        dirs: list[int] = []
        count = 0
        use_scores = fcontrib is not None

        def rec(done: int, load: int, forb: int, r: int, fwd: int, bwd: int, score: float) -> bool:
            nonlocal count
            avail = fwd | bwd
            fits = avail & fit[r]
            cand = fits & ~forb
            if not cand:
                if not fits:
                    count += 1
                    on_leaf(load, order, dirs, score)
                    return cap is not None and count >= cap
                return False
            low = cand & -cand
            j = low.bit_length() - 1
            isf = fwd & low
            isb = bwd & low
            if isf and isb:
                d = 0 if not use_scores or fcontrib[j] >= bcontrib[j] else 1
            else:
                d = 0 if isf else 1
            gain = (fcontrib[j] if d == 0 else bcontrib[j]) if use_scores else 0.0
            ndone = done | low
            nf = fwd & ~low
            nb = bwd & ~low
            for s in succs[j]:
                predleft[s] -= 1
                if predleft[s] == 0 and not ndone >> s & 1:
                    nf |= 1 << s
            for p in preds[j]:
                succleft[p] -= 1
                if succleft[p] == 0 and not ndone >> p & 1:
                    nb |= 1 << p
            order.append(j)
            dirs.append(d)
            stop = rec(ndone, load | low, forb, r - t[j], nf, nb, score + gain)
            order.pop()
            dirs.pop()
            for s in succs[j]:
                predleft[s] += 1
            for p in preds[j]:
                succleft[p] += 1
            if stop:
                return True
            return rec(done, load, forb | low, r, fwd, bwd, score)

        limit = sys.getrecursionlimit()
        if limit < 4 * n + 100:
            sys.setrecursionlimit(4 * n + 100)
        rec(assigned, 0, 0, self.c, fwd, bwd, 0.0)
        return count

    def maximal_loads(self, assigned: int) -> list[int]:
        """All maximal loads at state ``assigned``, in enumeration order."""
        out: list[int] = []
        self._walk(assigned, None, None, None, lambda load, o, d, s: out.append(load))
        return out

    def best_load(self, assigned: int, fcontrib: Sequence[float], bcontrib: Sequence[float],
                  cap: int) -> tuple[int, float, list[int], list[int], int]:
        """Best-scoring maximal load among the first ``cap`` enumerated.

        Returns ``(mask, score, order, dirs, enumerated)``; ``dirs`` uses
        0 for forward and 1 for backward. Ties keep the first found.
        """
        best = [0, float("-inf"), [], []]

        def leaf(load, order, dirs, score):
            if score > best[1]:
                best[0] = load
                best[1] = score
                best[2] = list(order)
                best[3] = list(dirs)

        count = self._walk(assigned, list(fcontrib), list(bcontrib), cap, leaf)
        return best[0], best[1], best[2], best[3], count
