"""Big-M master MILP over the current box partitions.

For binding ``i`` and active box ``j`` with indicator ``z``::

    x_l - Mx z >= lo_l - Mx        x_l + Mx z <= hi_l + Mx     (each input l)
    y   + My z <= y_hi + My        y   - My z >= y_lo - My
    sum_j z = 1,  z binary

With ``aggregate`` the valid rows ``x_l >= sum_j lo_jl z_j``,
``x_l <= sum_j hi_jl z_j`` and the same for ``y`` are added per binding.
They do not change the integer feasible set but tighten the LP relaxation
considerably, which keeps branch-and-bound trees small.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .boxes import BoxPartition
from .milp import LpProblem, MilpProblem, MilpSolution
from .model import LipschitzMinlp


@dataclass
class MasterModel:
    milp: MilpProblem
    n_original: int
    z_columns: list  # per binding: list of (box index, column)
    big_m: list  # per binding: (Mx, My)
    row_kinds: list  # (kind, binding, box) for each row; kind in linear/x-lo/x-hi/y-hi/y-lo/choice


def compute_big_m(problem: LipschitzMinlp, partitions: list) -> list:
    """Per-binding ``(Mx, My)`` large enough that a deactivated arm never binds."""
    lower, upper = problem.lower, problem.upper
    out = []
    for i, part in enumerate(partitions):
        b = problem.nonlinearities[i]
        idx = list(b.inputs)
        xlo, xhi = lower[idx], upper[idx]
        act = part.active_indices()
        mx = 0.0
        ylo = lower[b.output]
        yhi = upper[b.output]
        rad = 0.0
        for j in act:
            box = part.boxes[j]
            mx = max(mx, float(np.max(np.abs(box.upper - xlo), initial=0.0)),
                     float(np.max(np.abs(box.lower - xhi), initial=0.0)))
            om = part.omegas[j]
            ylo = min(ylo, om.y_lower)
            yhi = max(yhi, om.y_upper)
            rad = max(rad, om.radius)
        my = (yhi - ylo) + rad
        if problem.big_m is not None:
            mx = my = float(problem.big_m)
        out.append((mx, my))
    return out


def build(problem: LipschitzMinlp, partitions: list, aggregate: bool = True) -> MasterModel:
    n = problem.n
    lin = problem.linear
    zcols = []
    col = n
    for part in partitions:
        cols = []
        for j in part.active_indices():
            cols.append((j, col))
            col += 1
        zcols.append(cols)
    n_cols = col
    big_m = compute_big_m(problem, partitions)

    rr, cc, vv = [], [], []
    row_lo, row_hi, kinds = [], [], []
    r = 0
    q = lin.rows.shape[0]
    if q:
        nz_r, nz_c = np.nonzero(lin.rows)
        rr.extend(nz_r.tolist())
        cc.extend(nz_c.tolist())
        vv.extend(lin.rows[nz_r, nz_c].tolist())
        row_lo.extend(lin.rhs.tolist())
        row_hi.extend([np.inf] * q)
        kinds.extend(("linear", -1, -1) for _ in range(q))
        r = q
    inf = np.inf
    for i, part in enumerate(partitions):
        b = problem.nonlinearities[i]
        mx, my = big_m[i]
        for j, zc in zcols[i]:
            om = part.omegas[j]
            if om is None or not np.isfinite(om.radius):
                raise ValueError(f"binding {b.name!r} box {j}: invalid relaxation box")
            box = part.boxes[j]
            for ell, xc in enumerate(b.inputs):
                rr += [r, r, r + 1, r + 1]
                cc += [xc, zc, xc, zc]
                vv += [1.0, -mx, 1.0, mx]
                row_lo += [box.lower[ell] - mx, -inf]
                row_hi += [inf, box.upper[ell] + mx]
                kinds += [("x-lo", i, j), ("x-hi", i, j)]
                r += 2
            rr += [r, r, r + 1, r + 1]
            cc += [b.output, zc, b.output, zc]
            vv += [1.0, my, 1.0, -my]
            row_lo += [-inf, om.y_lower - my]
            row_hi += [om.y_upper + my, inf]
            kinds += [("y-hi", i, j), ("y-lo", i, j)]
            r += 2
        for _, zc in zcols[i]:
            rr.append(r)
            cc.append(zc)
            vv.append(1.0)
        row_lo.append(1.0)
        row_hi.append(1.0)
        kinds.append(("choice", i, -1))
        r += 1
        if aggregate:
            targets = [(xc, [part.boxes[j].lower[ell] for j, _ in zcols[i]],
                        [part.boxes[j].upper[ell] for j, _ in zcols[i]])
                       for ell, xc in enumerate(b.inputs)]
            targets.append((b.output, [part.omegas[j].y_lower for j, _ in zcols[i]],
                            [part.omegas[j].y_upper for j, _ in zcols[i]]))
            for vc, los, his in targets:
                for bounds, kind, lo_, hi_ in ((los, "agg-lo", 0.0, inf), (his, "agg-hi", -inf, 0.0)):
                    rr.append(r)
                    cc.append(vc)
                    vv.append(1.0)
                    for (_, zc), v in zip(zcols[i], bounds):
                        rr.append(r)
                        cc.append(zc)
                        vv.append(-float(v))
                    row_lo.append(lo_)
                    row_hi.append(hi_)
                    kinds.append((kind, i, -1))
                    r += 1
    A = sp.csr_matrix((vv, (rr, cc)), shape=(r, n_cols))
    c = np.concatenate([lin.objective, np.zeros(n_cols - n)])
    col_lo = np.concatenate([problem.lower, np.zeros(n_cols - n)])
    col_hi = np.concatenate([problem.upper, np.ones(n_cols - n)])
    integral = np.concatenate([problem.integral, np.ones(n_cols - n, dtype=bool)])
    names = [v.name for v in problem.variables]
    for i, cols in enumerate(zcols):
        names += [f"z_{problem.nonlinearities[i].name}_{j}" for j, _ in cols]
    names = [_safe_name(s) for s in names]
    lp = LpProblem(c, A, np.array(row_lo), np.array(row_hi), col_lo, col_hi)
    return MasterModel(MilpProblem(lp, integral, names), n, zcols, big_m, kinds)


def _safe_name(s: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "_.[]" else "_" for ch in s)


def extract(model: MasterModel, partitions: list, solution: MilpSolution,
            problem: LipschitzMinlp | None = None, tol: float = 1e-6):
    """Master point restricted to the original columns and the chosen box per binding."""
    if solution.x is None:
        raise ValueError("no solution to extract")
    x = np.asarray(solution.x, dtype=float)
    point = x[:model.n_original].copy()
    chosen = []
    for i, cols in enumerate(model.z_columns):
        pick = [j for j, c in cols if x[c] > 0.5]
        if not pick:
            raise RuntimeError(f"binding {i}: no indicator is set in the master solution")
        j = pick[0]
        if problem is not None:
            b = problem.nonlinearities[i]
            if not partitions[i].boxes[j].contains(point[list(b.inputs)], tol):
                raise RuntimeError(f"binding {b.name!r}: master point outside its chosen box")
        chosen.append(j)
    return point, chosen
