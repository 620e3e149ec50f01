"""MILP solving: dense simplex with branch-and-bound, plus a HiGHS backend."""
from __future__ import annotations

import math

from .branch_bound import solve_milp as solve_milp_native
from .highs import solve_milp_highs
from .lpformat import to_lp_text
from .problem import LpProblem, LpSolution, MilpProblem, MilpSolution
from .simplex import NumericalError, solve_lp

# dense tableau work grows with rows * (rows + cols); past this the native
# backend is too slow for repeated master solves
AUTO_NATIVE_MAX_ROWS = 200

BACKENDS = ("auto", "native", "highs")


def solve_milp(problem: MilpProblem, backend: str = "auto", gap: float = 1e-6,
               node_limit: int = 1_000_000, time_limit: float = math.inf) -> MilpSolution:
    """Dispatch to a backend; ``auto`` picks native for small problems."""
    if backend == "auto":
        backend = "native" if problem.lp.n_rows <= AUTO_NATIVE_MAX_ROWS else "highs"
    if backend == "native":
        return solve_milp_native(problem, gap, node_limit, time_limit)
    if backend == "highs":
        return solve_milp_highs(problem, gap, node_limit, time_limit)
    raise ValueError(f"unknown MILP backend {backend!r}")


__all__ = [
    "LpProblem", "LpSolution", "MilpProblem", "MilpSolution", "NumericalError",
    "solve_lp", "solve_milp", "solve_milp_native", "solve_milp_highs", "to_lp_text",
    "BACKENDS", "AUTO_NATIVE_MAX_ROWS",
]
