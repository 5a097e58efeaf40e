# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: knapsack pricing DP and maximal-load enumeration.

Semantics match ``_pykernels`` exactly; see that module for the contract.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, int32_t, int8_t

cnp.import_array()

cdef extern from *:
    """
    static inline int ualb_ctz64(unsigned long long x) { return __builtin_ctzll(x); }
    """
    int ualb_ctz64(unsigned long long x) nogil

cdef double TIE_EPS = 1e-12


def knapsack_max(weights, values, long capacity):
    cdef Py_ssize_t k_items = len(weights)
    if k_items == 0 or capacity <= 0:
        return 0.0, []
    cdef int64_t[::1] wt = np.ascontiguousarray(weights, dtype=np.int64)
    cdef double[::1] val = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] dp = np.zeros(capacity + 1)
    cdef cnp.uint8_t[:, ::1] keep = np.zeros((k_items, capacity + 1), dtype=np.uint8)
    cdef Py_ssize_t k
    cdef long w, wk
    cdef double vk, take, skip
    for k in range(k_items - 1, -1, -1):
        wk = wt[k]
        if wk > capacity:
            continue
        vk = val[k]
        w = capacity
        while w >= wk:
            take = dp[w - wk] + vk
            skip = dp[w]
            if take >= skip - TIE_EPS:
                keep[k, w] = 1
            if take > skip:
                dp[w] = take
            w -= 1
    chosen = []
    w = capacity
    for k in range(k_items):
        if keep[k, w]:
            chosen.append(k)
            w -= wt[k]
    return float(dp[capacity]), chosen


cdef class LoadEnumerator:
    cdef readonly int n
    cdef readonly long c
    cdef int W
    cdef int64_t[::1] t
    cdef uint64_t[:, ::1] fit
    cdef int32_t[::1] pred_ptr, pred_idx, succ_ptr, succ_idx
    cdef int32_t[::1] predleft, succleft
    cdef uint64_t[:, ::1] fwd, bwd, forb, done, load
    cdef int32_t[::1] order
    cdef int8_t[::1] dirs
    cdef int depth
    cdef double[::1] fc, bc
    cdef bint use_scores
    cdef long count, cap
    cdef int mode
    cdef list out
    cdef object full
    cdef uint64_t[::1] best_mask
    cdef double best_score
    cdef int32_t[::1] best_order
    cdef int8_t[::1] best_dirs
    cdef int best_len

    def __init__(self, times, long capacity, preds, succs):
        cdef int n = len(times)
        cdef int j, r, pos
        self.n = n
        self.c = capacity
        self.full = (1 << <object>n) - 1
        self.W = max(1, (n + 63) // 64)
        self.t = np.ascontiguousarray(times, dtype=np.int64)
        self.pred_ptr, self.pred_idx = _csr(preds)
        self.succ_ptr, self.succ_idx = _csr(succs)
        self.fit = np.zeros((capacity + 1, self.W), dtype=np.uint64)
        by_time = sorted(range(n), key=lambda q: times[q])
        cdef uint64_t[::1] acc = np.zeros(self.W, dtype=np.uint64)
        pos = 0
        for r in range(capacity + 1):
            while pos < n and self.t[by_time[pos]] <= r:
                j = by_time[pos]
                acc[j >> 6] |= (<uint64_t>1) << (j & 63)
                pos += 1
            self.fit[r, :] = acc
        self.predleft = np.zeros(n, dtype=np.int32)
        self.succleft = np.zeros(n, dtype=np.int32)
        levels = 2 * n + 2
        self.fwd = np.zeros((levels, self.W), dtype=np.uint64)
        self.bwd = np.zeros((levels, self.W), dtype=np.uint64)
        self.forb = np.zeros((levels, self.W), dtype=np.uint64)
        self.done = np.zeros((levels, self.W), dtype=np.uint64)
        self.load = np.zeros((levels, self.W), dtype=np.uint64)
        self.order = np.zeros(n + 1, dtype=np.int32)
        self.dirs = np.zeros(n + 1, dtype=np.int8)
        self.best_mask = np.zeros(self.W, dtype=np.uint64)
        self.best_order = np.zeros(n + 1, dtype=np.int32)
        self.best_dirs = np.zeros(n + 1, dtype=np.int8)
        self.fc = np.zeros(n)
        self.bc = np.zeros(n)

    cdef object _to_int(self, uint64_t[::1] words):
        cdef int w
        v = 0
        for w in range(self.W - 1, -1, -1):
            v = (v << 64) | <object>words[w]
        return v

    cdef void _setup(self, object assigned) except *:
        cdef int n = self.n
        cdef int W = self.W
        cdef int j, q, w
        cdef uint64_t m64 = 0xFFFFFFFFFFFFFFFF
        for w in range(W):
            self.done[0, w] = <uint64_t>((assigned >> (64 * w)) & m64)
            self.fwd[0, w] = 0
            self.bwd[0, w] = 0
            self.forb[0, w] = 0
            self.load[0, w] = 0
        for j in range(n):
            self.predleft[j] = 0
            self.succleft[j] = 0
            for q in range(self.pred_ptr[j], self.pred_ptr[j + 1]):
                if not self._isdone(0, self.pred_idx[q]):
                    self.predleft[j] += 1
            for q in range(self.succ_ptr[j], self.succ_ptr[j + 1]):
                if not self._isdone(0, self.succ_idx[q]):
                    self.succleft[j] += 1
        for j in range(n):
            if not self._isdone(0, j):
                if self.predleft[j] == 0:
                    self.fwd[0, j >> 6] |= (<uint64_t>1) << (j & 63)
                if self.succleft[j] == 0:
                    self.bwd[0, j >> 6] |= (<uint64_t>1) << (j & 63)
        self.depth = 0
        self.count = 0

    cdef inline bint _isdone(self, int lvl, int j) nogil:
        return (self.done[lvl, j >> 6] >> (j & 63)) & 1

    cdef bint _rec(self, int lvl, long r, double score) except -1:
        cdef int W = self.W
        cdef int w, j = -1, q, s, d
        cdef uint64_t av, af, cw, bit
        cdef bint anyfit = False
        cdef bint stop
        cdef bint isf, isb
        cdef double gain
        cdef int nl = lvl + 1
        for w in range(W):
            av = self.fwd[lvl, w] | self.bwd[lvl, w]
            af = av & self.fit[r, w]
            if af:
                anyfit = True
                cw = af & ~self.forb[lvl, w]
                if cw:
                    j = w * 64 + ualb_ctz64(cw)
                    break
        if j < 0:
            if not anyfit:
                self.count += 1
                self._leaf(lvl, score)
                return self.cap > 0 and self.count >= self.cap
            return False
        w = j >> 6
        bit = (<uint64_t>1) << (j & 63)
        isf = (self.fwd[lvl, w] & bit) != 0
        isb = (self.bwd[lvl, w] & bit) != 0
        if isf and isb:
            d = 0 if (not self.use_scores or self.fc[j] >= self.bc[j]) else 1
        else:
            d = 0 if isf else 1
        if self.use_scores:
            gain = self.fc[j] if d == 0 else self.bc[j]
        else:
            gain = 0.0
        # include j
        for q in range(W):
            self.fwd[nl, q] = self.fwd[lvl, q]
            self.bwd[nl, q] = self.bwd[lvl, q]
            self.forb[nl, q] = self.forb[lvl, q]
            self.done[nl, q] = self.done[lvl, q]
            self.load[nl, q] = self.load[lvl, q]
        self.fwd[nl, w] &= ~bit
        self.bwd[nl, w] &= ~bit
        self.done[nl, w] |= bit
        self.load[nl, w] |= bit
        for q in range(self.succ_ptr[j], self.succ_ptr[j + 1]):
            s = self.succ_idx[q]
            self.predleft[s] -= 1
            if self.predleft[s] == 0 and not self._isdone(nl, s):
                self.fwd[nl, s >> 6] |= (<uint64_t>1) << (s & 63)
        for q in range(self.pred_ptr[j], self.pred_ptr[j + 1]):
            s = self.pred_idx[q]
            self.succleft[s] -= 1
            if self.succleft[s] == 0 and not self._isdone(nl, s):
                self.bwd[nl, s >> 6] |= (<uint64_t>1) << (s & 63)
        self.order[self.depth] = j
        self.dirs[self.depth] = d
        self.depth += 1
        stop = self._rec(nl, r - self.t[j], score + gain)
        self.depth -= 1
        for q in range(self.succ_ptr[j], self.succ_ptr[j + 1]):
            self.predleft[self.succ_idx[q]] += 1
        for q in range(self.pred_ptr[j], self.pred_ptr[j + 1]):
            self.succleft[self.pred_idx[q]] += 1
        if stop:
            return True
        # forbid j
        for q in range(W):
            self.fwd[nl, q] = self.fwd[lvl, q]
            self.bwd[nl, q] = self.bwd[lvl, q]
            self.forb[nl, q] = self.forb[lvl, q]
            self.done[nl, q] = self.done[lvl, q]
            self.load[nl, q] = self.load[lvl, q]
        self.forb[nl, w] |= bit
        return self._rec(nl, r, score)

    cdef int _leaf(self, int lvl, double score) except -1:
        cdef int q
        if self.mode == 0:
            self.out.append(self._to_int(self.load[lvl]))
        elif score > self.best_score:
            self.best_score = score
            for q in range(self.W):
                self.best_mask[q] = self.load[lvl, q]
            for q in range(self.depth):
                self.best_order[q] = self.order[q]
                self.best_dirs[q] = self.dirs[q]
            self.best_len = self.depth
        return 0

    def maximal_loads(self, assigned):
        self._setup(assigned)
        self.mode = 0
        self.out = []
        self.use_scores = False
        self.cap = 0
        if (self.full & ~assigned) == 0:
            return []
        self._rec(0, self.c, 0.0)
        out = self.out
        self.out = None
        return out

    def best_load(self, assigned, fcontrib, bcontrib, long cap):
        cdef int j
        self._setup(assigned)
        self.mode = 1
        self.use_scores = True
        self.cap = cap
        for j in range(self.n):
            self.fc[j] = fcontrib[j]
            self.bc[j] = bcontrib[j]
        self.best_score = float("-inf")
        self.best_len = 0
        for j in range(self.W):
            self.best_mask[j] = 0
        if (self.full & ~assigned) == 0:
            return 0, float("-inf"), [], [], 0
        self._rec(0, self.c, 0.0)
        order = [self.best_order[j] for j in range(self.best_len)]
        dirs = [self.best_dirs[j] for j in range(self.best_len)]
        return self._to_int(self.best_mask), self.best_score, order, dirs, self.count


def _csr(lists):
    ptr = np.zeros(len(lists) + 1, dtype=np.int32)
    flat = []
    for j, items in enumerate(lists):
        flat.extend(items)
        ptr[j + 1] = len(flat)
    return ptr, np.asarray(flat if flat else [0], dtype=np.int32)
