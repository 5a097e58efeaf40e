"""Restricted set-covering master LP solved by a revised primal simplex.

The LP is ``min sum(x)`` subject to ``A x >= 1, x >= 0`` where each column
of ``A`` is a station load projected onto the rows (unassigned tasks).
Rows get a surplus and an artificial variable each; variables are indexed
``[artificial | surplus | loads]``. Only the ``m x m`` basis inverse is
kept, so adding a column is free and the next solve warm-starts from the
previous optimal basis. Load columns are 0/1, which lets pricing run as
one ``reduceat`` over their flattened row indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .instance import Load, bits

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
DUALITY_TOL = 1e-6
BLAND_AFTER = 50
REFACTOR_EVERY = 200


class LpError(RuntimeError):
    pass


@dataclass
class LpSolution:
    objective: float
    primal: np.ndarray  # one value per column, in column order
    duals: dict[int, float]  # task -> pi
    pivots: int = 0

    def dual_vector(self, n: int) -> list[float]:
        pi = [0.0] * n
        for j, v in self.duals.items():
            pi[j] = v
        return pi


class MasterProblem:
    """Rows are tasks, columns are load masks projected onto those rows."""

    def __init__(self, rows: Iterable[int], columns: Iterable[Load | int] = ()):
        self.rows = list(rows)
        self.row_of = {j: i for i, j in enumerate(self.rows)}
        self.row_mask = 0
        for j in self.rows:
            self.row_mask |= 1 << j
        self.columns: list[int] = []
        self._index: dict[int, int] = {}
        self._members: list[np.ndarray] = []
        self._flat: np.ndarray | None = None
        self._starts: np.ndarray | None = None
        self._A: np.ndarray | None = None
        m = len(self.rows)
        self._binv = np.eye(m)
        self._x = np.ones(m)
        self._basis = list(range(m))
        self._phase1_done = False
        self._since_refactor = 0
        for col in columns:
            self.add_column(col)

    @property
    def m(self) -> int:
        return len(self.rows)

    def add_column(self, load: Load | int) -> bool:
        """Append ``load ∩ rows``; returns False for empty or duplicate projections."""
        mask = load.tasks if isinstance(load, Load) else int(load)
        proj = mask & self.row_mask
        if proj == 0 or proj in self._index:
            return False
        self._index[proj] = len(self.columns)
        self.columns.append(proj)
        self._members.append(np.fromiter((self.row_of[j] for j in bits(proj)), dtype=np.intp))
        self._flat = None
        self._A = None
        return True

    def column_matrix(self) -> np.ndarray:
        if self._A is None:
            A = np.zeros((self.m, len(self.columns)))
            for k, rows in enumerate(self._members):
                A[rows, k] = 1.0
            self._A = A
        return self._A

    def crash(self, partition: Iterable[Load | int]) -> bool:
        """Start from a feasible basis built on disjoint columns covering all rows.

        Each part contributes its column, basic in the part's lowest row;
        the other rows of the part take their surplus. Phase 1 is then
        skipped. Returns False (and changes nothing) unless the parts,
        projected onto the rows, are disjoint, cover every row and are
        already columns of the master.
        """
        if self._phase1_done or self.m == 0:
            return False
        m = self.m
        basis = [m + i for i in range(m)]
        seen = 0
        for part in partition:
            mask = (part.tasks if isinstance(part, Load) else int(part)) & self.row_mask
            if mask == 0:
                continue
            if mask & seen or mask not in self._index:
                return False
            seen |= mask
            lead = self.row_of[next(bits(mask))]
            basis[lead] = 2 * m + self._index[mask]
        if seen != self.row_mask:
            return False
        self._basis = basis
        self._refactor()
        self._phase1_done = True
        return True

    # -- simplex -------------------------------------------------------------

    def _index_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self._flat is None:
            self._flat = np.concatenate(self._members)
            lengths = np.fromiter((len(a) for a in self._members), dtype=np.intp, count=len(self._members))
            self._starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
        return self._flat, self._starts

    def _column(self, v: int) -> np.ndarray:
        m = self.m
        a = np.zeros(m)
        if v < m:
            a[v] = 1.0
        elif v < 2 * m:
            a[v - m] = -1.0
        else:
            a[self._members[v - 2 * m]] = 1.0
        return a

    def _ftran(self, v: int) -> np.ndarray:
        m = self.m
        if v < m:
            return self._binv[:, v].copy()
        if v < 2 * m:
            return -self._binv[:, v - m]
        return self._binv[:, self._members[v - 2 * m]].sum(axis=1)

    def _refactor(self) -> None:
        B = np.column_stack([self._column(v) for v in self._basis])
        try:
            self._binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise LpError("singular basis on refactorization") from exc
        self._x = self._binv @ np.ones(self.m)
        self._x[np.abs(self._x) < 1e-12] = 0.0
        self._since_refactor = 0

    def _pivot(self, r: int, e: int, col: np.ndarray) -> None:
        binv, x = self._binv, self._x
        piv = col[r]
        row = binv[r] / piv
        xr = x[r] / piv
        binv -= np.outer(col, row)
        binv[r] = row
        x -= col * xr
        x[r] = xr
        x[(x < 0) & (x > -1e-11)] = 0.0
        self._basis[r] = e
        self._since_refactor += 1

    def _reduced_costs(self, cost: np.ndarray, phase1: bool) -> np.ndarray:
        m = self.m
        cb = cost[self._basis]
        pi = cb @ self._binv
        d = np.empty(2 * m + len(self.columns))
        d[:m] = cost[:m] - pi
        d[m:2 * m] = cost[m:2 * m] + pi
        if self.columns:
            flat, starts = self._index_arrays()
            d[2 * m:] = cost[2 * m:] - np.add.reduceat(pi[flat], starts)
        d[self._basis] = 0.0
        if not phase1:
            d[:m] = 0.0
        return d

    def _run(self, cost: np.ndarray, phase1: bool, max_iter: int) -> int:
        """Primal simplex from the current basis; returns pivot count."""
        pivots = 0
        degenerate = 0
        while True:
            if pivots >= max_iter:
                raise LpError(f"simplex iteration cap {max_iter} reached")
            if self._since_refactor >= REFACTOR_EVERY:
                self._refactor()
            d = self._reduced_costs(cost, phase1)
            neg = np.nonzero(d < -PIVOT_TOL)[0]
            if neg.size == 0:
                return pivots
            bland = degenerate >= BLAND_AFTER
            e = int(neg[0]) if bland else int(neg[np.argmin(d[neg])])
            col = self._ftran(e)
            pos = np.nonzero(col > PIVOT_TOL)[0]
            if pos.size == 0:
                raise LpError("unbounded covering LP")
            ratios = self._x[pos] / col[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12]
            if bland:
                basis = np.asarray(self._basis)
                r = int(ties[np.argmin(basis[ties])])
            else:
                r = int(ties[np.argmax(col[ties])])
            degenerate = degenerate + 1 if best <= 1e-12 else 0
            self._pivot(r, e, col)
            pivots += 1

    def solve(self, max_iter: int | None = None) -> LpSolution:
        m = self.m
        k = len(self.columns)
        if m == 0:
            return LpSolution(0.0, np.zeros(k), {}, 0)
        covered = 0
        for mask in self.columns:
            covered |= mask
        if covered != self.row_mask:
            first = next(bits(self.row_mask & ~covered))
            raise LpError(f"uncovered task {first + 1}")
        if max_iter is None:
            max_iter = 50 * (m + k) + 1000
        nvar = 2 * m + k
        pivots = 0
        if not self._phase1_done:
            cost1 = np.zeros(nvar)
            cost1[:m] = 1.0
            pivots += self._run(cost1, True, max_iter)
            art = [r for r, v in enumerate(self._basis) if v < m]
            if self._x[art].sum() > FEAS_TOL:
                raise LpError("phase 1 ended infeasible")
            self._drive_out_artificials()
            self._phase1_done = True
        cost = np.zeros(nvar)
        cost[2 * m:] = 1.0
        for attempt in range(2):
            pivots += self._run(cost, False, max_iter)
            sol = self._extract(cost, pivots)
            if self._certified(sol):
                return sol
            self._refactor()
        raise LpError("numerical trouble: optimality certificate failed after refactorization")

    def _drive_out_artificials(self) -> None:
        m = self.m
        in_basis = set(self._basis)
        for r, v in enumerate(list(self._basis)):
            if v >= m:
                continue
            # row r of B^-1 times each non-artificial column
            row = self._binv[r]
            best_e, best_val = -1, PIVOT_TOL
            for e in range(m, 2 * m + len(self.columns)):
                if e in in_basis:
                    continue
                val = -row[e - m] if e < 2 * m else row[self._members[e - 2 * m]].sum()
                if abs(val) > best_val:
                    best_e, best_val = e, abs(val)
            if best_e >= 0:
                self._pivot(r, best_e, self._ftran(best_e))
                in_basis.discard(v)
                in_basis.add(best_e)

    def _extract(self, cost: np.ndarray, pivots: int) -> LpSolution:
        m = self.m
        k = len(self.columns)
        x = np.zeros(k)
        for r, v in enumerate(self._basis):
            if v >= 2 * m:
                x[v - 2 * m] = max(self._x[r], 0.0)
        cb = cost[self._basis]
        pi = cb @ self._binv
        pi[pi < 0] = 0.0
        duals = {j: float(pi[i]) for i, j in enumerate(self.rows)}
        return LpSolution(float(x.sum()), x, duals, pivots)

    def _certified(self, sol: LpSolution) -> bool:
        m = self.m
        pi = np.array([sol.duals[j] for j in self.rows])
        if self.columns:
            flat, starts = self._index_arrays()
            cover = np.zeros(m)
            np.add.at(cover, flat, np.repeat(sol.primal, np.diff(np.append(starts, flat.size))))
            if np.any(cover < 1 - FEAS_TOL):
                return False
            if np.any(np.add.reduceat(pi[flat], starts) > 1 + FEAS_TOL):
                return False
        return abs(pi.sum() - sol.objective) <= DUALITY_TOL


def solve_rlpm(mp: MasterProblem) -> LpSolution:
    return mp.solve()


def add_column(mp: MasterProblem, load: Load | int) -> bool:
    return mp.add_column(load)
