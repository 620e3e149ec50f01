"""Best-bound branch-and-bound on top of the dense simplex."""
from __future__ import annotations

import heapq
import math
import time

import numpy as np

from .problem import LpProblem, MilpProblem, MilpSolution
from .simplex import solve_lp

INT_TOL = 1e-6
GAP_TOL = 1e-6


def _branch_var(x, integral):
    frac = np.abs(x - np.round(x))
    frac[~integral] = 0.0
    cand = np.flatnonzero(frac > INT_TOL)
    if cand.size == 0:
        return -1
    # most fractional; argmax returns the lowest index on ties
    score = 0.5 - np.abs((x[cand] - np.floor(x[cand])) - 0.5)
    return int(cand[np.argmax(score)])


def solve_milp(problem: MilpProblem, gap: float = GAP_TOL, node_limit: int = 1_000_000,
               time_limit: float = math.inf) -> MilpSolution:
    """Solve to a proven absolute gap of ``gap``.

    Nodes are solved when created and kept in a heap keyed by their LP bound,
    so the bound of the popped node is the global dual bound.  That sequence is
    recorded in ``bound_history`` and never decreases.
    """
    lp = problem.lp
    if not isinstance(lp.A, np.ndarray):
        lp = LpProblem(lp.c, lp.dense_rows(), lp.row_lo, lp.row_hi, lp.col_lo, lp.col_hi)
    integral = problem.integral
    t0 = time.perf_counter()
    root = solve_lp(lp)
    if root.status != "optimal":
        return MilpSolution(root.status, None, root.objective, 1, backend="native")
    counter = 0
    heap = [(root.objective, counter, lp.col_lo.copy(), lp.col_hi.copy(), root)]
    best_x = None
    best_obj = math.inf
    nodes = 1
    history: list[float] = []
    bound = -math.inf
    final_gap = 0.0
    while heap:
        if nodes >= node_limit or time.perf_counter() - t0 > time_limit:
            return MilpSolution("limit", best_x, best_obj, nodes, best_obj - bound,
                                history, "native")
        obj, _, lo, hi, sol = heapq.heappop(heap)
        bound = max(bound, obj)
        history.append(bound)
        if obj >= best_obj - gap:
            final_gap = max(best_obj - bound, 0.0)
            break
        j = _branch_var(sol.x, integral)
        if j < 0:
            x = sol.x.copy()
            x[integral] = np.round(x[integral])
            best_x, best_obj = x, float(lp.c @ x)
            continue
        v = sol.x[j]
        for side in (0, 1):
            clo, chi = lo.copy(), hi.copy()
            if side == 0:
                chi[j] = math.floor(v)
            else:
                clo[j] = math.ceil(v)
            if clo[j] > chi[j]:
                continue
            child = LpProblem(lp.c, lp.A, lp.row_lo, lp.row_hi, clo, chi)
            res = solve_lp(child, basis_hint=sol.basis)
            nodes += 1
            if res.status != "optimal":
                continue
            cobj = max(res.objective, obj)
            if cobj >= best_obj - gap:
                continue
            counter += 1
            heapq.heappush(heap, (cobj, counter, clo, chi, res))
    if best_x is None:
        return MilpSolution("infeasible", None, math.inf, nodes, math.inf, history, "native")
    return MilpSolution("optimal", best_x, best_obj, nodes, final_gap, history, "native")
