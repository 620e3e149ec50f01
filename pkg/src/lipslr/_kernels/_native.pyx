# cython: language_level=3
"""Compiled hot kernels: dense bounded simplex pivoting and the pipe pressure solve.

Function signatures and semantics match ``_fallback.py``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, log1p, sqrt, INFINITY, NAN

cnp.import_array()

OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
BUDGET = 3
NUMERICAL = 4

PIPE_OK = 0
PIPE_BRACKET = 1
PIPE_NOCONV = 2

cdef int _BLAND_AFTER = 10


def simplex_iterate(double[:, ::1] T, double[::1] x, double[::1] lo, double[::1] hi,
                    double[::1] cost, long[::1] basis, long[::1] pos, long max_pivots,
                    double tol_feas=1e-9, double tol_opt=1e-9, double tol_piv=1e-9):
    cdef Py_ssize_t m = T.shape[0], n = T.shape[1]
    cdef Py_ssize_t i, j, k, r, b, leaving
    cdef long pivots = 0, degenerate = 0
    cdef bint infeasible, bland, phase2_fresh = False, better
    cdef double[::1] w = np.zeros(m)
    cdef double[::1] d = np.zeros(n)
    cdef double score, best, s, t, t_best, target, r_target, r_piv, a, v, l, h, piv, f
    cdef Py_ssize_t r_var
    cdef double[::1] col = np.zeros(m)

    while pivots < max_pivots:
        infeasible = False
        for i in range(m):
            b = basis[i]
            if x[b] < lo[b] - tol_feas:
                w[i] = -1.0
                infeasible = True
            elif x[b] > hi[b] + tol_feas:
                w[i] = 1.0
                infeasible = True
            else:
                w[i] = 0.0
        if infeasible:
            for k in range(n):
                d[k] = 0.0
            for i in range(m):
                if w[i] != 0.0:
                    for k in range(n):
                        d[k] -= w[i] * T[i, k]
            phase2_fresh = False
        elif not phase2_fresh:
            for k in range(n):
                d[k] = cost[k]
            for i in range(m):
                f = cost[basis[i]]
                if f != 0.0:
                    for k in range(n):
                        d[k] -= f * T[i, k]
            phase2_fresh = True
        for i in range(m):
            d[basis[i]] = 0.0
        bland = degenerate >= _BLAND_AFTER

        j = -1
        best = 0.0
        for k in range(n):
            if pos[k] >= 0:
                continue
            score = 0.0
            if x[k] < hi[k] and d[k] < -tol_opt:
                score = -d[k]
            if x[k] > lo[k] and d[k] > tol_opt and d[k] > score:
                score = d[k]
            if score > best:
                best = score
                j = k
                if bland:
                    break
        if j < 0:
            return (INFEASIBLE if infeasible else OPTIMAL), pivots
        s = 1.0 if d[j] < 0.0 else -1.0

        t_best = hi[j] - lo[j]
        r = -1
        r_target = 0.0
        r_piv = 0.0
        r_var = n
        for i in range(m):
            col[i] = T[i, j]
            if fabs(col[i]) <= tol_piv:
                continue
            b = basis[i]
            a = -s * col[i]
            v = x[b]
            l = lo[b]
            h = hi[b]
            if a > 0.0:
                if v < l - tol_feas:
                    t = (l - v) / a
                    target = l
                elif v <= h + tol_feas and h < INFINITY:
                    t = (h - v if h > v else 0.0) / a
                    target = h
                else:
                    continue
            else:
                if v > h + tol_feas:
                    t = (v - h) / (-a)
                    target = h
                elif v >= l - tol_feas and l > -INFINITY:
                    t = (v - l if v > l else 0.0) / (-a)
                    target = l
                else:
                    continue
            if t < t_best - 1e-12:
                better = True
            elif r >= 0 and fabs(t - t_best) <= 1e-12:
                better = (b < r_var) if bland else (fabs(a) > r_piv)
            else:
                better = False
            if better:
                t_best = t
                r = i
                r_target = target
                r_piv = fabs(a)
                r_var = b
        if t_best == INFINITY:
            return (NUMERICAL if infeasible else UNBOUNDED), pivots

        for i in range(m):
            if col[i] != 0.0:
                x[basis[i]] += -s * col[i] * t_best
        if r < 0:
            x[j] = hi[j] if s > 0 else lo[j]
        else:
            x[j] += s * t_best
            leaving = basis[r]
            x[leaving] = r_target
            piv = T[r, j]
            for k in range(n):
                T[r, k] /= piv
            for i in range(m):
                if i == r or col[i] == 0.0:
                    continue
                f = T[i, j]
                for k in range(n):
                    T[i, k] -= f * T[r, k]
            for i in range(m):
                T[i, j] = 0.0
            T[r, j] = 1.0
            if phase2_fresh:
                f = d[j]
                for k in range(n):
                    d[k] -= f * T[r, k]
            basis[r] = j
            pos[j] = r
            pos[leaving] = -1
        pivots += 1
        if t_best <= tol_feas:
            degenerate += 1
        else:
            degenerate = 0
    return BUDGET, pivots


cdef inline double _F(double p, double q2rst, double alpha) nogil:
    cdef double ap = alpha * p
    cdef double l1 = log1p(ap)
    return (ap - l1) / (alpha * alpha) + q2rst * (l1 - log(p))


cdef inline double _dF(double p, double q2rst, double alpha) nogil:
    return (p * p - q2rst) / (p * (1.0 + alpha * p))


def pressure_F(double p, double flux, double rst, double alpha):
    return _F(p, flux * flux * rst, alpha)


def pressure_dF(double p, double flux, double rst, double alpha):
    return _dF(p, flux * flux * rst, alpha)


cdef (double, int) _pipe(double p_start, double flux, double x, double theta,
                         double rst, double alpha, double rtol, int max_iter) nogil:
    cdef double q2rst = flux * flux * rst
    cdef double lo_end = fabs(flux) * sqrt(rst)
    cdef double hi_end = 1.0 / fabs(alpha)
    cdef double f_start, rhs, span, lo, hi, g_lo, g_hi, tol, p, g, p_new
    cdef int it
    if not (lo_end < p_start < hi_end):
        return NAN, 1
    f_start = _F(p_start, q2rst, alpha)
    rhs = f_start - 0.5 * rst * flux * fabs(flux) * theta * x
    if rhs == f_start:
        return p_start, 0
    span = hi_end - lo_end
    lo = lo_end + 1e-9 * span
    hi = hi_end - 1e-9 * span
    g_lo = _F(lo, q2rst, alpha) - rhs
    g_hi = _F(hi, q2rst, alpha) - rhs
    if g_lo > 0.0 or g_hi < 0.0:
        return NAN, 1
    tol = rtol * fabs(f_start) + 1e-12
    p = p_start
    if p < lo:
        p = lo
    if p > hi:
        p = hi
    for it in range(max_iter):
        g = _F(p, q2rst, alpha) - rhs
        if fabs(g) <= tol:
            return p, 0
        if g > 0.0:
            hi = p
        else:
            lo = p
        p_new = p - g / _dF(p, q2rst, alpha)
        if not (lo < p_new < hi):
            p_new = 0.5 * (lo + hi)
        if p_new == p or hi - lo <= 4e-16 * hi:
            g = _F(p_new, q2rst, alpha) - rhs
            if fabs(g) <= tol:
                return p_new, 0
            return p_new, 2
        p = p_new
    return p, 2


def pipe_pressure(double p_start, double flux, double x, double theta, double rst,
                  double alpha, double rtol=1e-10, int max_iter=200):
    cdef (double, int) res = _pipe(p_start, flux, x, theta, rst, alpha, rtol, max_iter)
    return res[0], res[1]


def pipe_pressure_many(p_start, flux, x, double theta, double rst, double alpha,
                       double rtol=1e-10, int max_iter=200):
    p_arr = np.ascontiguousarray(p_start, dtype=float)
    shape = p_arr.shape
    cdef const double[::1] ps = p_arr.reshape(-1)
    cdef const double[::1] fl = np.ascontiguousarray(
        np.broadcast_to(np.asarray(flux, dtype=float), shape)).reshape(-1)
    cdef const double[::1] xs = np.ascontiguousarray(
        np.broadcast_to(np.asarray(x, dtype=float), shape)).reshape(-1)
    cdef Py_ssize_t k, n = ps.shape[0]
    out = np.empty(n)
    status = np.empty(n, dtype=np.int64)
    cdef double[::1] o = out
    cdef long[::1] st = status
    cdef (double, int) res
    with nogil:
        for k in range(n):
            res = _pipe(ps[k], fl[k], xs[k], theta, rst, alpha, rtol, max_iter)
            o[k] = res[0]
            st[k] = res[1]
    return out.reshape(shape), status.reshape(shape)
