"""Oracles for the bilevel reformulation: the lower-level value function and quadratics."""
from __future__ import annotations

import threading

import numpy as np

from ..oracles import Oracle, register
from .instance import BilevelInstance
from .qp import ActiveSetQP, EmptyPolytopeError


class Assumption1Error(ValueError):
    """The lower-level feasible set is empty at the queried upper-level point."""


@register("bilevel-phi")
class PhiOracle(Oracle):
    """Optimal value of the lower level as a function of ``x``, exact by active-set enumeration."""

    thread_safe = True

    def __init__(self, instance):
        self.instance = instance if isinstance(instance, BilevelInstance) \
            else BilevelInstance.from_dict(instance)
        inst = self.instance
        ny = inst.ny
        self._R = np.vstack([inst.D, np.eye(ny), -np.eye(ny)])
        self._qp = ActiveSetQP(inst.G_l, self._R)
        self._cache: dict = {}
        self._lock = threading.Lock()
        self.evaluations = 0

    @classmethod
    def from_params(cls, params):
        return cls(params["instance"])

    def params(self):
        return {"instance": self.instance.to_dict()}

    def _data(self, x):
        inst = self.instance
        g = inst.d_l + inst.F.T @ x
        r = np.concatenate([inst.b - inst.C @ x, inst.y_hi, -inst.y_lo])
        return g, r

    def solve(self, x):
        """``(phi(x), y)`` with ``y`` a global lower-level minimizer."""
        x = np.asarray(x, dtype=float).reshape(-1)
        key = tuple(np.round(x, 12).tolist())
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        g, r = self._data(x)
        try:
            val, y = self._qp.minimize(g, r)
        except EmptyPolytopeError:
            raise Assumption1Error(f"lower level infeasible at x={x.tolist()}") from None
        with self._lock:
            self._cache[key] = (val, y)
            self.evaluations += 1
        return val, y

    def __call__(self, x):
        return self.solve(x)[0]


@register("bilevel-quadratic")
class QuadraticOracle(Oracle):
    """``1/2 z'Qz + q'z + const``."""

    def __init__(self, Q, q, const=0.0):
        self.Q = np.atleast_2d(np.asarray(Q, dtype=float))
        self.q = np.asarray(q, dtype=float).reshape(-1)
        self.const = float(const)

    def params(self):
        return {"Q": self.Q.tolist(), "q": self.q.tolist(), "const": self.const}

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ self.Q @ z + self.q @ z + self.const)
