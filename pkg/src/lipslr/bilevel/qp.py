"""Exact small-scale quadratic programming by enumeration.

Nonconvex quadratics over polytopes attain their minimum at a KKT point of
some face, so enumerating every active set of size at most the dimension
and keeping the feasible stationary points finds the global minimum.  All
factorizations depend only on the active set, so they are computed once and
reused for every right-hand side.
"""
from __future__ import annotations

import itertools

import numpy as np

_COND_MAX = 1e12


class EmptyPolytopeError(ValueError):
    """The polytope has no feasible point."""


class ActiveSetQP:
    """``min 1/2 y'Gy + g'y  s.t.  R y <= r`` with ``g`` and ``r`` supplied per solve."""

    def __init__(self, G, R, max_active: int | None = None):
        self.G = np.atleast_2d(np.asarray(G, dtype=float))
        n = self.G.shape[0]
        self.R = np.asarray(R, dtype=float).reshape(-1, n)
        m = self.R.shape[0]
        kmax = n if max_active is None else min(n, max_active)
        self.sets = []
        self.inverses = []
        for k in range(kmax + 1):
            for S in itertools.combinations(range(m), k):
                S = list(S)
                RS = self.R[S]
                K = np.zeros((n + k, n + k))
                K[:n, :n] = self.G
                K[:n, n:] = RS.T
                K[n:, :n] = RS
                if np.linalg.cond(K) > _COND_MAX:
                    continue
                self.sets.append(S)
                self.inverses.append(np.linalg.inv(K)[:n])
        self.n = n

    def candidates(self, g, r, tol: float = 1e-9) -> np.ndarray:
        """Feasible stationary points of every nonsingular active set (rows)."""
        g = np.asarray(g, dtype=float)
        r = np.asarray(r, dtype=float)
        pts = []
        for S, Kinv in zip(self.sets, self.inverses):
            rhs = np.concatenate([-g, r[S]])
            pts.append(Kinv @ rhs)
        if not pts:
            return np.zeros((0, self.n))
        P = np.array(pts)
        scale = 1.0 + np.abs(r)
        ok = np.all(P @ self.R.T <= r + tol * scale, axis=1)
        return P[ok]

    def value(self, Y, g) -> np.ndarray:
        Y = np.atleast_2d(Y)
        return 0.5 * np.einsum("ij,jk,ik->i", Y, self.G, Y) + Y @ g

    def minimize(self, g, r):
        """``(value, y)`` of the global minimum; raises when infeasible."""
        P = self.candidates(g, r)
        if P.shape[0] == 0:
            raise EmptyPolytopeError("no feasible point")
        v = self.value(P, g)
        k = int(np.argmin(v))
        return float(v[k]), P[k]

    def maximize(self, g, r):
        """Global maximum, via the minimum of the negated quadratic on the same sets."""
        P = self.candidates(g, r)
        if P.shape[0] == 0:
            raise EmptyPolytopeError("no feasible point")
        v = self.value(P, g)
        k = int(np.argmax(v))
        # stationary points of the negated problem coincide with those of the original
        return float(v[k]), P[k]


def box_rows(lo, hi):
    """``R y <= r`` encoding of ``lo <= y <= hi``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = lo.shape[0]
    R = np.vstack([np.eye(n), -np.eye(n)])
    return R, np.concatenate([hi, -lo])


def quadratic_range_on_box(G, g, lo, hi):
    """``(min, max)`` of ``1/2 y'Gy + g'y`` over a box, exact."""
    R, r = box_rows(lo, hi)
    qp = ActiveSetQP(G, R)
    return qp.minimize(g, r)[0], qp.maximize(g, r)[0]


def box_vertices(lo, hi) -> np.ndarray:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = lo.shape[0]
    if n == 0:
        return np.zeros((1, 0))
    V = np.array(list(itertools.product((0, 1), repeat=n)), dtype=float)
    return lo + V * (hi - lo)


def polytope_vertices(R, r, tol: float = 1e-9) -> np.ndarray:
    """Vertices of ``{z : R z <= r}`` (bounded) by basis enumeration."""
    R = np.asarray(R, dtype=float)
    r = np.asarray(r, dtype=float)
    m, n = R.shape
    verts = []
    scale = 1.0 + np.abs(r)
    for S in itertools.combinations(range(m), n):
        RS = R[list(S)]
        if np.linalg.cond(RS) > _COND_MAX:
            continue
        z = np.linalg.solve(RS, r[list(S)])
        if np.all(R @ z <= r + tol * scale):
            verts.append(z)
    if not verts:
        raise EmptyPolytopeError("polytope is empty")
    V = np.unique(np.round(np.array(verts), 12), axis=0)
    return V
