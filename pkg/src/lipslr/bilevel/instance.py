"""Optimistic bilevel problems with quadratic objectives and linear constraints.

Upper level::

    min 1/2 x'Hu x + cu'x + 1/2 y'Gu y + du'y   s.t.  A x + B y <= a,  bounds

Lower level, parameterized by ``x``::

    min_y 1/2 y'Gl y + dl'y + x'F y   s.t.  C x + D y <= b,  y_lo <= y <= y_hi
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

PSD_FLOOR = -1e-8


def _mat(v, rows, cols):
    if v is None:
        return np.zeros((rows, cols))
    return np.asarray(v, dtype=float).reshape(rows, cols)


def _vec(v, n):
    if v is None:
        return np.zeros(n)
    return np.asarray(v, dtype=float).reshape(n)


@dataclass
class BilevelInstance:
    x_lo: np.ndarray
    x_hi: np.ndarray
    y_lo: np.ndarray
    y_hi: np.ndarray
    H_u: np.ndarray = None
    c_u: np.ndarray = None
    G_u: np.ndarray = None
    d_u: np.ndarray = None
    A: np.ndarray = None
    B: np.ndarray = None
    a: np.ndarray = None
    G_l: np.ndarray = None
    d_l: np.ndarray = None
    C: np.ndarray = None
    D: np.ndarray = None
    b: np.ndarray = None
    F: np.ndarray = None
    x_integral: np.ndarray = None
    reference_solution: dict | None = None
    hoffman_constant: float | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x_lo = np.atleast_1d(np.asarray(self.x_lo, dtype=float))
        self.x_hi = np.atleast_1d(np.asarray(self.x_hi, dtype=float))
        self.y_lo = np.atleast_1d(np.asarray(self.y_lo, dtype=float))
        self.y_hi = np.atleast_1d(np.asarray(self.y_hi, dtype=float))
        nx, ny = self.nx, self.ny
        self.H_u = _mat(self.H_u, nx, nx)
        self.c_u = _vec(self.c_u, nx)
        self.G_u = _mat(self.G_u, ny, ny)
        self.d_u = _vec(self.d_u, ny)
        self.G_l = _mat(self.G_l, ny, ny)
        self.d_l = _vec(self.d_l, ny)
        self.F = _mat(self.F, nx, ny)
        mu = 0 if self.a is None else np.asarray(self.a).size
        ml = 0 if self.b is None else np.asarray(self.b).size
        self.A = _mat(self.A, mu, nx)
        self.B = _mat(self.B, mu, ny)
        self.a = _vec(self.a, mu)
        self.C = _mat(self.C, ml, nx)
        self.D = _mat(self.D, ml, ny)
        self.b = _vec(self.b, ml)
        self.x_integral = np.zeros(nx, dtype=bool) if self.x_integral is None else \
            np.asarray(self.x_integral, dtype=bool).reshape(nx)

    @property
    def nx(self) -> int:
        return self.x_lo.shape[0]

    @property
    def ny(self) -> int:
        return self.y_lo.shape[0]

    @property
    def has_bilinear(self) -> bool:
        return bool(np.any(self.F != 0.0))

    @property
    def box_constrained_lower(self) -> bool:
        """Lower-level feasible set is the plain ``y`` box (no rows)."""
        return self.D.shape[0] == 0 or (not np.any(self.C) and not np.any(self.D))

    def check(self) -> list:
        issues = []
        for nm in ("H_u", "G_u", "G_l"):
            M = getattr(self, nm)
            if not np.allclose(M, M.T, atol=1e-12):
                issues.append(f"{nm} is not symmetric")
        for nm in ("H_u", "G_u"):
            M = getattr(self, nm)
            if M.size and np.linalg.eigvalsh(0.5 * (M + M.T)).min() < PSD_FLOOR:
                issues.append(f"{nm} is not positive semidefinite")
        if np.any(self.x_lo > self.x_hi) or np.any(self.y_lo > self.y_hi):
            issues.append("bounds reversed")
        for arr in (self.x_lo, self.x_hi, self.y_lo, self.y_hi):
            if not np.all(np.isfinite(arr)):
                issues.append("non-finite bound")
                break
        return issues

    def lower_objective(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return float(0.5 * y @ self.G_l @ y + self.d_l @ y + x @ self.F @ y)

    def upper_objective(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return float(0.5 * x @ self.H_u @ x + self.c_u @ x + 0.5 * y @ self.G_u @ y + self.d_u @ y)

    def hoffman(self) -> float:
        if self.hoffman_constant is None:
            warnings.warn("no Hoffman constant supplied; using 1.0, which may be invalid",
                          stacklevel=2)
            return 1.0
        return float(self.hoffman_constant)

    @classmethod
    def from_dict(cls, d: dict) -> "BilevelInstance":
        keys = ("H_u", "c_u", "G_u", "d_u", "A", "B", "a", "G_l", "d_l", "C", "D", "b", "F",
                "x_integral")
        kw = {k: d.get(k) for k in keys}
        return cls(d["x_lo"], d["x_hi"], d["y_lo"], d["y_hi"], **kw,
                   reference_solution=d.get("reference_solution"),
                   hoffman_constant=d.get("hoffman_constant"), name=d.get("name", ""))

    def to_dict(self) -> dict:
        out = {"name": self.name}
        for k in ("x_lo", "x_hi", "y_lo", "y_hi", "H_u", "c_u", "G_u", "d_u", "A", "B", "a",
                  "G_l", "d_l", "C", "D", "b", "F"):
            out[k] = np.asarray(getattr(self, k)).tolist()
        out["x_integral"] = self.x_integral.astype(int).tolist()
        if self.reference_solution is not None:
            out["reference_solution"] = self.reference_solution
        if self.hoffman_constant is not None:
            out["hoffman_constant"] = self.hoffman_constant
        return out


def eliminate_bilinear(inst: BilevelInstance) -> BilevelInstance:
    """Move ``x'F y`` into a pure lower-level quadratic.

    Every ``x_i`` with a nonzero row in ``F`` gets a lower-level copy ``y_k``
    tied by ``y_k = x_i`` (two lower-level rows) and the term becomes ``y_k y_j``.
    """
    if not inst.has_bilinear:
        return inst
    rows = [i for i in range(inst.nx) if np.any(inst.F[i] != 0.0)]
    k = len(rows)
    ny = inst.ny + k
    G = np.zeros((ny, ny))
    G[:inst.ny, :inst.ny] = inst.G_l
    for t, i in enumerate(rows):
        G[inst.ny + t, :inst.ny] = inst.F[i]
        G[:inst.ny, inst.ny + t] = inst.F[i]
    ml = inst.D.shape[0]
    C = np.zeros((ml + 2 * k, inst.nx))
    D = np.zeros((ml + 2 * k, ny))
    b = np.zeros(ml + 2 * k)
    C[:ml], D[:ml, :inst.ny], b[:ml] = inst.C, inst.D, inst.b
    for t, i in enumerate(rows):
        r = ml + 2 * t
        D[r, inst.ny + t], C[r, i] = 1.0, -1.0
        D[r + 1, inst.ny + t], C[r + 1, i] = -1.0, 1.0
    pad = lambda v, fill: np.concatenate([v, fill])  # noqa: E731
    Gu = np.zeros((ny, ny))
    Gu[:inst.ny, :inst.ny] = inst.G_u
    B = np.hstack([inst.B, np.zeros((inst.A.shape[0], k))])
    return BilevelInstance(
        inst.x_lo, inst.x_hi, pad(inst.y_lo, inst.x_lo[rows]), pad(inst.y_hi, inst.x_hi[rows]),
        inst.H_u, inst.c_u, Gu, pad(inst.d_u, np.zeros(k)), inst.A, B, inst.a, G,
        pad(inst.d_l, np.zeros(k)), C, D, b, None, inst.x_integral, inst.reference_solution,
        inst.hoffman_constant, inst.name, dict(inst.meta, bilinear_copies=rows))
