"""LP/MILP data containers shared by the solver backends."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass
class LpProblem:
    """``min c x`` subject to ``row_lo <= A x <= row_hi`` and ``col_lo <= x <= col_hi``.

    Column bounds must be finite; row bounds may be infinite on one side.
    Equality rows use ``row_lo == row_hi``.
    """

    c: np.ndarray
    A: np.ndarray
    row_lo: np.ndarray
    row_hi: np.ndarray
    col_lo: np.ndarray
    col_hi: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).copy()
        n = self.c.shape[0]
        if sp.issparse(self.A):
            self.A = sp.csr_matrix(self.A, dtype=float)
        else:
            self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        m = self.A.shape[0]
        self.row_lo = np.broadcast_to(np.asarray(self.row_lo, dtype=float), (m,)).copy()
        self.row_hi = np.broadcast_to(np.asarray(self.row_hi, dtype=float), (m,)).copy()
        self.col_lo = np.broadcast_to(np.asarray(self.col_lo, dtype=float), (n,)).copy()
        self.col_hi = np.broadcast_to(np.asarray(self.col_hi, dtype=float), (n,)).copy()
        if not (np.all(np.isfinite(self.col_lo)) and np.all(np.isfinite(self.col_hi))):
            raise ValueError("column bounds must be finite")
        if np.any(self.row_lo > self.row_hi):
            raise ValueError("row lower bound exceeds upper bound")

    def dense_rows(self) -> np.ndarray:
        return self.A.toarray() if sp.issparse(self.A) else self.A

    @property
    def n_cols(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def residuals(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Nonnegative row and column bound violations of ``x``."""
        x = np.asarray(x, dtype=float)
        ax = self.A @ x
        rows = np.maximum(np.maximum(self.row_lo - ax, ax - self.row_hi), 0.0)
        cols = np.maximum(np.maximum(self.col_lo - x, x - self.col_hi), 0.0)
        return rows, cols


@dataclass
class MilpProblem:
    lp: LpProblem
    integral: np.ndarray
    names: list[str] | None = None

    def __post_init__(self):
        self.integral = np.broadcast_to(
            np.asarray(self.integral, dtype=bool), (self.lp.n_cols,)).copy()
        idx = self.integral
        if np.any(self.lp.col_lo[idx] != np.round(self.lp.col_lo[idx])) or np.any(
                self.lp.col_hi[idx] != np.round(self.lp.col_hi[idx])):
            raise ValueError("integral columns need integer bounds")


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None
    objective: float
    basis: tuple | None = None
    pivots: int = 0


@dataclass
class MilpSolution:
    status: str  # optimal | infeasible | unbounded | limit
    x: np.ndarray | None
    objective: float
    nodes: int = 0
    gap: float = float("inf")
    bound_history: list[float] = field(default_factory=list)
    backend: str = ""
