"""Dense bounded primal simplex built on the ``simplex_iterate`` kernel.

Rows are handled through slack columns ``s = A x`` bounded by the row
bounds, so the working system is ``[A | -I] (x, s) = 0``.  The tableau is
kept explicitly as ``B^-1 [A | -I]`` and refactored from scratch whenever a
kernel run ends, which removes drift before the result is trusted.
"""
from __future__ import annotations

import numpy as np

from .. import _kernels
from .problem import LpProblem, LpSolution

_STATUS = {
    _kernels.OPTIMAL: "optimal",
    _kernels.INFEASIBLE: "infeasible",
    _kernels.UNBOUNDED: "unbounded",
}


class NumericalError(RuntimeError):
    """Simplex breakdown that survived refactorization."""


class _Work:
    def __init__(self, lp: LpProblem):
        m, n = lp.n_rows, lp.n_cols
        self.m, self.n = m, n
        self.M = np.hstack([lp.dense_rows(), -np.eye(m)]) if m else np.zeros((0, n))
        self.lo = np.concatenate([lp.col_lo, lp.row_lo])
        self.hi = np.concatenate([lp.col_hi, lp.row_hi])
        self.cost = np.concatenate([lp.c, np.zeros(m)])

    def slack_start(self):
        m, n = self.m, self.n
        basis = np.arange(n, n + m, dtype=np.int64)
        at_upper = np.zeros(n + m, dtype=bool)
        at_upper[:n] = self.cost[:n] < 0.0
        return basis, at_upper

    def factor(self, basis, at_upper):
        """Tableau, values and position map for ``basis``; None if singular."""
        m, n = self.m, self.n
        N = n + m
        if m:
            B = self.M[:, basis]
            try:
                T = np.linalg.solve(B, self.M)
            except np.linalg.LinAlgError:
                return None
            if not np.all(np.isfinite(T)):
                return None
            T[:, basis] = np.eye(m)
        else:
            T = np.zeros((0, N))
        pos = np.full(N, -1, dtype=np.int64)
        pos[basis] = np.arange(m)
        x = np.where(at_upper, self.hi, self.lo)
        bad = ~np.isfinite(x)
        x[bad] = np.where(np.isfinite(self.lo[bad]), self.lo[bad], self.hi[bad])
        nonbasic = pos < 0
        if np.any(~np.isfinite(x[nonbasic])):
            return None
        x[basis] = 0.0
        if m:
            x[basis] = -(T[:, nonbasic] @ x[nonbasic])
        return np.ascontiguousarray(T), x, pos


def solve_lp(lp: LpProblem, basis_hint=None, max_pivots: int | None = None,
             tol: float = 1e-9) -> LpSolution:
    """Solve ``lp`` to optimality.

    ``basis_hint`` is the ``basis`` field of a previous solution of an LP
    with the same rows; it is used as the starting basis when nonsingular.
    Status is one of ``optimal``, ``infeasible``, ``unbounded``.
    """
    w = _Work(lp)
    start = None
    if basis_hint is not None:
        basis, at_upper = basis_hint
        basis = np.asarray(basis, dtype=np.int64).copy()
        at_upper = np.asarray(at_upper, dtype=bool).copy()
        if basis.shape[0] == w.m and at_upper.shape[0] == w.n + w.m:
            start = w.factor(basis, at_upper)
    if start is None:
        basis, at_upper = w.slack_start()
        start = w.factor(basis, at_upper)
    T, x, pos = start
    if max_pivots is None:
        max_pivots = 50 * (w.m + w.n) + 1000
    total = 0
    last = None
    for _ in range(8):
        status, piv = _kernels.simplex_iterate(
            T, x, w.lo, w.hi, w.cost, basis, pos, max_pivots - total, tol, tol, tol)
        total += piv
        if status == _kernels.BUDGET:
            raise NumericalError(f"pivot budget exhausted after {total} pivots")
        at_upper = (pos < 0) & (x >= w.hi) & np.isfinite(w.hi)
        fresh = w.factor(basis, at_upper)
        if fresh is None:
            raise NumericalError("singular basis at refactorization")
        T, x, pos = fresh
        if status != _kernels.NUMERICAL and piv == 0 and status == last:
            break
        if status == _kernels.NUMERICAL and last == _kernels.NUMERICAL and piv == 0:
            raise NumericalError("pivot breakdown persists after refactorization")
        last = status
    else:
        raise NumericalError("simplex did not settle after repeated refactorization")
    name = _STATUS[status]
    at_upper = (pos < 0) & (x >= w.hi) & np.isfinite(w.hi)
    hint = (basis.copy(), at_upper)
    if name != "optimal":
        return LpSolution(name, None, np.inf if name == "infeasible" else -np.inf, hint, total)
    xs = x[:w.n].copy()
    return LpSolution("optimal", xs, float(lp.c @ xs), hint, total)
