"""Projection of the master point onto a binding's graph inside the shrunk active box.

The search is derivative free: a fixed candidate set followed by a few
sweeps of coordinatewise golden-section refinement.  Any point of the shrunk
box paired with its oracle value is a valid splitting point, so the search
only influences split quality.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .boxes import Box, center, shrink
from .model import LipschitzMinlp, evaluate

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

DEFAULT_BUDGET = 16
SWEEPS = 3
GOLDEN_STEPS = 24


@dataclass
class SubproblemResult:
    binding: int
    point: np.ndarray
    value: float
    distance: float
    method: str


def _golden(fun, lo, hi, x0, f0, steps):
    """Minimize ``fun`` on ``[lo, hi]``; returns the best point seen, never worse than ``x0``."""
    best_x, best_f = x0, f0
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(steps):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
    for x, f in ((c, fc), (d, fd)):
        if f < best_f:
            best_x, best_f = x, f
    return best_x, best_f


def solve_separable(problem: LipschitzMinlp, i: int, box: Box, lam: float, anchor,
                    budget: int = DEFAULT_BUDGET, seed: int = 0, k: int = 0) -> SubproblemResult:
    """Graph point in the ``lam``-shrunk ``box`` close to ``anchor`` (a full-length point)."""
    b = problem.nonlinearities[i]
    anchor = np.asarray(anchor, dtype=float)
    a_in = anchor[list(b.inputs)]
    a_out = float(anchor[b.output])

    def dist(x, y):
        return float(np.sum((x - a_in) ** 2) + (y - a_out) ** 2)

    if b.center_only or lam >= 0.5:
        x = center(box)
        y = evaluate(problem, i, x)
        return SubproblemResult(i, x, y, math.sqrt(dist(x, y)), "center")

    sb = shrink(box, lam)
    lo, hi = sb.lower, sb.upper
    free = np.flatnonzero(hi > lo)
    mid = center(sb)
    cands = [np.clip(a_in, lo, hi), mid]
    for ell in free:
        for v in (lo[ell], hi[ell]):
            p = mid.copy()
            p[ell] = v
            cands.append(p)
    if free.size and budget > 0:
        rng = np.random.default_rng([int(seed), int(k), int(i)])
        u = qmc.LatinHypercube(d=free.size, seed=rng).random(budget)
        for row in u:
            p = mid.copy()
            p[free] = lo[free] + row * (hi[free] - lo[free])
            cands.append(p)

    best_x, best_y, best_f = None, 0.0, math.inf
    for p in cands:
        y = evaluate(problem, i, p)
        f = dist(p, y)
        if f < best_f:
            best_x, best_y, best_f = p, y, f

    cache = {}

    for _ in range(SWEEPS):
        improved = False
        for ell in free:
            base = best_x.copy()

            def fun(t, ell=ell, base=base):
                p = base.copy()
                p[ell] = t
                y = evaluate(problem, i, p)
                cache[t] = y
                return dist(p, y)

            t, f = _golden(fun, lo[ell], hi[ell], best_x[ell], best_f, GOLDEN_STEPS)
            if f < best_f:
                best_x = base.copy()
                best_x[ell] = t
                best_y, best_f = cache[t], f
                improved = True
            cache.clear()
        if not improved:
            break
    return SubproblemResult(i, best_x, best_y, math.sqrt(best_f), "projected-search")


def solve_all(problem: LipschitzMinlp, partitions: list, chosen: list, point, lam: float,
              parallel: bool = False, which=None, budget: int = DEFAULT_BUDGET, seed: int = 0,
              k: int = 0) -> list:
    """Subproblem results for bindings ``which`` (default all), in binding order."""
    idx = list(range(len(partitions))) if which is None else sorted(which)

    def one(i):
        return solve_separable(problem, i, partitions[i].boxes[chosen[i]], lam, point,
                               budget, seed, k)

    if parallel and len(idx) > 1:
        with ThreadPoolExecutor() as pool:
            return list(pool.map(one, idx))
    return [one(i) for i in idx]
