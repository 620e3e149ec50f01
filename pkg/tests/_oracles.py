"""Independent reference computations used as test oracles."""
import itertools

import numpy as np
from scipy.optimize import linprog

from lipslr.milp import LpProblem, MilpProblem


def linprog_lp(lp: LpProblem):
    """``(status, objective)`` of ``lp`` from HiGHS via linprog."""
    A = lp.dense_rows()
    ub_rows, ub_rhs = [], []
    for i in range(lp.n_rows):
        if np.isfinite(lp.row_hi[i]):
            ub_rows.append(A[i])
            ub_rhs.append(lp.row_hi[i])
        if np.isfinite(lp.row_lo[i]):
            ub_rows.append(-A[i])
            ub_rhs.append(-lp.row_lo[i])
    res = linprog(lp.c, A_ub=np.array(ub_rows) if ub_rows else None,
                  b_ub=np.array(ub_rhs) if ub_rhs else None,
                  bounds=list(zip(lp.col_lo, lp.col_hi)), method="highs")
    if res.status == 2:
        return "infeasible", np.inf
    assert res.status == 0, res.message
    return "optimal", float(res.fun)


def vertex_enumeration(lp: LpProblem, tol=1e-9):
    """Minimum of ``c x`` over all basic feasible points (small problems only)."""
    A = lp.dense_rows()
    n = lp.n_cols
    rows, rhs = [], []
    for i in range(lp.n_rows):
        for bound, sgn in ((lp.row_lo[i], 1.0), (lp.row_hi[i], 1.0)):
            if np.isfinite(bound):
                rows.append(sgn * A[i])
                rhs.append(bound)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        rows += [e, e]
        rhs += [lp.col_lo[j], lp.col_hi[j]]
    rows, rhs = np.array(rows), np.array(rhs)
    best = np.inf
    for act in itertools.combinations(range(len(rows)), n):
        M = rows[list(act)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, rhs[list(act)])
        r, c = lp.residuals(x)
        if r.max(initial=0.0) <= 1e-7 and c.max(initial=0.0) <= 1e-7:
            best = min(best, float(lp.c @ x))
    return best


def random_milp(rng, max_cols=12, max_bin=6):
    """Random bounded MILP with at most ``max_bin`` binaries; may be infeasible."""
    n = int(rng.integers(2, max_cols + 1))
    k = int(rng.integers(1, min(max_bin, n) + 1))
    m = int(rng.integers(1, 9))
    A = rng.integers(-5, 6, size=(m, n)).astype(float)
    hi = np.concatenate([np.ones(k), rng.uniform(1.0, 4.0, n - k)])
    x0 = np.concatenate([rng.integers(0, 2, k), rng.uniform(0, 1, n - k) * hi[k:]])
    ax = A @ x0
    slack = rng.uniform(-0.5, 2.0, m)
    row_lo = np.where(rng.random(m) < 0.3, ax - slack, -np.inf)
    row_hi = ax + slack
    row_lo = np.minimum(row_lo, row_hi)
    lp = LpProblem(rng.normal(size=n), A, row_lo, row_hi, np.zeros(n), hi)
    return MilpProblem(lp, np.arange(n) < k)


def enumerate_milp(problem: MilpProblem) -> float:
    """Exhaustive enumeration of the binaries with an LP for the continuous rest."""
    lp = problem.lp
    idx = np.flatnonzero(problem.integral)
    best = np.inf
    for bits in itertools.product((0.0, 1.0), repeat=idx.size):
        lo, hi = lp.col_lo.copy(), lp.col_hi.copy()
        lo[idx] = hi[idx] = bits
        status, obj = linprog_lp(LpProblem(lp.c, lp.A, lp.row_lo, lp.row_hi, lo, hi))
        if status == "optimal":
            best = min(best, obj)
    return best


# gas: an independent high-precision version of the pressure equation

def mp_F(p, flux, rst, alpha):
    """Antiderivative of ``(p^2 - flux^2 rst) / (p (1 + alpha p))`` in 40-digit arithmetic."""
    import mpmath
    with mpmath.workdps(40):
        p, a = mpmath.mpf(p), mpmath.mpf(alpha)
        c = mpmath.mpf(flux) ** 2 * mpmath.mpf(rst)
        return p / a - mpmath.log(1 + a * p) / a ** 2 - c * mpmath.log(p) + c * mpmath.log(1 + a * p)


def mp_residual(p, p_u, flux, x, theta, rst, alpha):
    """``|F(p) - F(p_u) + rst flux |flux| theta x / 2|`` and ``|F(p_u)|`` as floats."""
    import mpmath
    with mpmath.workdps(40):
        fu = mp_F(p_u, flux, rst, alpha)
        rhs = fu - mpmath.mpf(rst) * flux * abs(flux) * theta * x / 2
        return float(abs(mp_F(p, flux, rst, alpha) - rhs)), float(abs(fu))


def mp_bisect_pout(p_u, flux, x, theta, rst, alpha, tol=1e-12):
    """Outlet pressure by plain bisection on the admissible interval (relative tolerance)."""
    import mpmath
    with mpmath.workdps(40):
        fu = mp_F(p_u, flux, rst, alpha)
        rhs = fu - mpmath.mpf(rst) * flux * abs(flux) * theta * x / 2
        lo = mpmath.mpf(abs(flux)) * mpmath.sqrt(rst) * (1 + mpmath.mpf(10) ** -30)
        hi = (1 / abs(mpmath.mpf(alpha))) * (1 - mpmath.mpf(10) ** -30)
        while hi - lo > tol * hi:
            mid = (lo + hi) / 2
            if mp_F(mid, flux, rst, alpha) < rhs:
                lo = mid
            else:
                hi = mid
        return float((lo + hi) / 2)


def grid_polish_phi(inst, x, n=401, starts=5):
    """Lower-level optimal value at ``x`` by a dense grid plus SLSQP polish of the best points."""
    from scipy.optimize import minimize
    x = np.asarray(x, float)
    ny = inst.ny
    axes = [np.linspace(inst.y_lo[k], inst.y_hi[k], n) for k in range(ny)]
    Y = np.stack([g.reshape(-1) for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    rhs = inst.b - inst.C @ x
    ok = np.all(Y @ inst.D.T <= rhs + 1e-12, axis=1) if inst.D.size else np.ones(len(Y), bool)
    Y = Y[ok]
    g = inst.d_l + inst.F.T @ x
    vals = 0.5 * np.einsum("ij,jk,ik->i", Y, inst.G_l, Y) + Y @ g
    best = float(vals.min())

    def fun(y):
        return 0.5 * y @ inst.G_l @ y + g @ y

    def jac(y):
        return inst.G_l @ y + g

    cons = [{"type": "ineq", "fun": lambda y: rhs - inst.D @ y, "jac": lambda y: -inst.D}] \
        if inst.D.size else []
    for k in np.argsort(vals)[:starts]:
        res = minimize(fun, Y[k], jac=jac, method="SLSQP", constraints=cons,
                       bounds=list(zip(inst.y_lo, inst.y_hi)), options={"ftol": 1e-14})
        y = np.clip(res.x, inst.y_lo, inst.y_hi)
        if not inst.D.size or np.all(inst.D @ y <= rhs + 1e-9):
            best = min(best, float(fun(y)))
    return best
