"""Pure-Python implementations of the hot kernels.

These mirror ``_native.pyx`` function by function and are used whenever the
compiled extension is unavailable (or explicitly requested through
``LIPSLR_KERNELS=python``).
"""
import math

import numpy as np

# simplex status codes shared with the compiled core
OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
BUDGET = 3
NUMERICAL = 4

# pipe solver status codes
PIPE_OK = 0
PIPE_BRACKET = 1
PIPE_NOCONV = 2

_BLAND_AFTER = 10


def _phase1_costs(x, lo, hi, basis, tol):
    xb = x[basis]
    w = np.zeros(basis.shape[0])
    w[xb < lo[basis] - tol] = -1.0
    w[xb > hi[basis] + tol] = 1.0
    return w


def simplex_iterate(T, x, lo, hi, cost, basis, pos, max_pivots,
                    tol_feas=1e-9, tol_opt=1e-9, tol_piv=1e-9):
    """Run bounded primal simplex pivots on the dense tableau ``T``.

    ``T`` holds ``B^-1 [A | -I]``; ``x`` the values of every column, nonbasic
    ones sitting exactly on a bound.  Phase 1 minimizes the sum of bound
    violations of basic variables, phase 2 the cost ``cost``.  Everything is
    updated in place.  Returns ``(status, pivots)``.
    """
    m, n = T.shape
    pivots = 0
    degenerate = 0
    d = None
    phase2_fresh = False
    while pivots < max_pivots:
        w = _phase1_costs(x, lo, hi, basis, tol_feas)
        infeasible = bool(np.any(w))
        if infeasible:
            rows = np.flatnonzero(w)
            d = -(w[rows] @ T[rows])
            phase2_fresh = False
        else:
            if not phase2_fresh:
                d = cost - cost[basis] @ T
                phase2_fresh = True
        d[basis] = 0.0
        bland = degenerate >= _BLAND_AFTER

        can_up = x < hi
        can_down = x > lo
        nonbasic = pos < 0
        score = np.where(nonbasic & can_up & (d < -tol_opt), -d, 0.0)
        score = np.maximum(score, np.where(nonbasic & can_down & (d > tol_opt), d, 0.0))
        eligible = np.flatnonzero(score > 0.0)
        if eligible.size == 0:
            return (INFEASIBLE if infeasible else OPTIMAL), pivots
        if bland:
            j = int(eligible[0])
        else:
            j = int(eligible[np.argmax(score[eligible])])
        s = 1.0 if d[j] < 0.0 else -1.0

        col = T[:, j]
        alpha = -s * col
        t_best = hi[j] - lo[j]
        r = -1
        r_target = 0.0
        r_piv = 0.0
        r_var = n
        for i in np.flatnonzero(np.abs(col) > tol_piv):
            b = basis[i]
            a = alpha[i]
            v = x[b]
            l = lo[b]
            h = hi[b]
            if a > 0.0:
                if v < l - tol_feas:
                    t = (l - v) / a
                    target = l
                elif v <= h + tol_feas and h < math.inf:
                    t = max(h - v, 0.0) / a
                    target = h
                else:
                    continue
            else:
                if v > h + tol_feas:
                    t = (v - h) / (-a)
                    target = h
                elif v >= l - tol_feas and l > -math.inf:
                    t = max(v - l, 0.0) / (-a)
                    target = l
                else:
                    continue
            if t < t_best - 1e-12:
                better = True
            elif r >= 0 and abs(t - t_best) <= 1e-12:
                better = b < r_var if bland else abs(a) > r_piv
            else:
                better = False
            if better:
                t_best = t
                r = int(i)
                r_target = target
                r_piv = abs(a)
                r_var = b
        if t_best == math.inf:
            return (NUMERICAL if infeasible else UNBOUNDED), pivots

        nz = np.flatnonzero(col)
        x[basis[nz]] += alpha[nz] * t_best
        if r < 0:
            # bound flip of the entering variable
            x[j] = hi[j] if s > 0 else lo[j]
        else:
            x[j] += s * t_best
            leaving = basis[r]
            x[leaving] = r_target
            piv = T[r, j]
            T[r, :] /= piv
            rows = nz[nz != r]
            if rows.size:
                T[rows, :] -= np.outer(T[rows, j], T[r, :])
            T[:, j] = 0.0
            T[r, j] = 1.0
            if phase2_fresh:
                d -= d[j] * T[r, :]
            basis[r] = j
            pos[j] = r
            pos[leaving] = -1
        pivots += 1
        if t_best <= tol_feas:
            degenerate += 1
        else:
            degenerate = 0
    return BUDGET, pivots


def _pressure_F(p, q2rst, alpha):
    ap = alpha * p
    l1 = math.log1p(ap)
    return (ap - l1) / (alpha * alpha) + q2rst * (l1 - math.log(p))


def _pressure_dF(p, q2rst, alpha):
    return (p * p - q2rst) / (p * (1.0 + alpha * p))


def pressure_F(p, flux, rst, alpha):
    """Pressure function value, stable form of the log expression."""
    return _pressure_F(p, flux * flux * rst, alpha)


def pressure_dF(p, flux, rst, alpha):
    return _pressure_dF(p, flux * flux * rst, alpha)


def pipe_pressure(p_start, flux, x, theta, rst, alpha, rtol=1e-10, max_iter=200):
    """Solve ``F(p) = F(p_start) - rst*flux*|flux|*theta*x/2`` for ``p``.

    Newton on a bracket inside the admissible interval, bisection whenever a
    Newton step leaves it.  Returns ``(p, status)``.
    """
    q2rst = flux * flux * rst
    lo_end = abs(flux) * math.sqrt(rst)
    hi_end = 1.0 / abs(alpha)
    if not (lo_end < p_start < hi_end):
        return math.nan, PIPE_BRACKET
    f_start = _pressure_F(p_start, q2rst, alpha)
    rhs = f_start - 0.5 * rst * flux * abs(flux) * theta * x
    if rhs == f_start:
        return p_start, PIPE_OK
    span = hi_end - lo_end
    lo = lo_end + 1e-9 * span
    hi = hi_end - 1e-9 * span
    g_lo = _pressure_F(lo, q2rst, alpha) - rhs
    g_hi = _pressure_F(hi, q2rst, alpha) - rhs
    if g_lo > 0.0 or g_hi < 0.0:
        return math.nan, PIPE_BRACKET
    tol = rtol * abs(f_start) + 1e-12
    p = min(max(p_start, lo), hi)
    for _ in range(max_iter):
        g = _pressure_F(p, q2rst, alpha) - rhs
        if abs(g) <= tol:
            return p, PIPE_OK
        if g > 0.0:
            hi = p
        else:
            lo = p
        step = g / _pressure_dF(p, q2rst, alpha)
        p_new = p - step
        if not (lo < p_new < hi):
            p_new = 0.5 * (lo + hi)
        if p_new == p or hi - lo <= 4e-16 * hi:
            g = _pressure_F(p_new, q2rst, alpha) - rhs
            if abs(g) <= tol:
                return p_new, PIPE_OK
            return p_new, PIPE_NOCONV
        p = p_new
    return p, PIPE_NOCONV


def pipe_pressure_many(p_start, flux, x, theta, rst, alpha, rtol=1e-10, max_iter=200):
    """Vectorized wrapper around :func:`pipe_pressure` (loops in Python)."""
    p_start = np.asarray(p_start, dtype=float)
    flux = np.broadcast_to(np.asarray(flux, dtype=float), p_start.shape)
    x = np.broadcast_to(np.asarray(x, dtype=float), p_start.shape)
    out = np.empty(p_start.shape)
    status = np.empty(p_start.shape, dtype=np.int64)
    for idx in np.ndindex(p_start.shape):
        out[idx], status[idx] = pipe_pressure(
            float(p_start[idx]), float(flux[idx]), float(x[idx]),
            theta, rst, alpha, rtol, max_iter)
    return out, status
