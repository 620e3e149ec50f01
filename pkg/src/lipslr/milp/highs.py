"""MILP backend delegating to HiGHS through ``scipy.optimize.milp``."""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .problem import MilpProblem, MilpSolution


def solve_milp_highs(problem: MilpProblem, gap: float = 1e-6, node_limit: int | None = None,
                     time_limit: float = math.inf) -> MilpSolution:
    lp = problem.lp
    options = {"mip_rel_gap": 1e-9, "presolve": True}
    if node_limit is not None:
        options["node_limit"] = int(node_limit)
    if math.isfinite(time_limit):
        options["time_limit"] = float(time_limit)
    constraints = []
    if lp.n_rows:
        constraints.append(LinearConstraint(lp.A, lp.row_lo, lp.row_hi))
    res = milp(lp.c, integrality=problem.integral.astype(int),
               bounds=Bounds(lp.col_lo, lp.col_hi), constraints=constraints, options=options)
    if res.status == 0:
        x = np.asarray(res.x, dtype=float)
        x[problem.integral] = np.round(x[problem.integral])
        x = np.clip(x, lp.col_lo, lp.col_hi)
        bound = getattr(res, "mip_dual_bound", None)
        g = 0.0 if bound is None or not np.isfinite(bound) else max(float(res.fun) - bound, 0.0)
        return MilpSolution("optimal", x, float(lp.c @ x), int(getattr(res, "mip_node_count", 0) or 0),
                            g, backend="highs")
    if res.status == 2:
        return MilpSolution("infeasible", None, math.inf, backend="highs")
    if res.status == 3:
        return MilpSolution("unbounded", None, -math.inf, backend="highs")
    return MilpSolution("limit", None if res.x is None else np.asarray(res.x), math.inf,
                        backend="highs")
