"""Human-readable LP text dump of a MILP for manual cross-checks."""
from __future__ import annotations

import math

import numpy as np

from .problem import MilpProblem


def _num(v: float) -> str:
    return repr(float(v))


def _expr(coefs, names) -> str:
    parts = []
    for j in np.flatnonzero(coefs):
        c = float(coefs[j])
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {_num(abs(c))} {names[j]}")
    if not parts:
        return "0 " + names[0] if names else "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def to_lp_text(problem: MilpProblem) -> str:
    """Render ``problem`` in CPLEX LP syntax."""
    lp = problem.lp
    names = problem.names or [f"x{j}" for j in range(lp.n_cols)]
    A = lp.dense_rows()
    out = ["Minimize", " obj: " + _expr(lp.c, names), "Subject To"]
    for i in range(lp.n_rows):
        e = _expr(A[i], names)
        lo, hi = lp.row_lo[i], lp.row_hi[i]
        if lo == hi:
            out.append(f" r{i}: {e} = {_num(lo)}")
            continue
        if math.isfinite(lo):
            out.append(f" r{i}_lo: {e} >= {_num(lo)}")
        if math.isfinite(hi):
            out.append(f" r{i}_hi: {e} <= {_num(hi)}")
    out.append("Bounds")
    for j in range(lp.n_cols):
        out.append(f" {_num(lp.col_lo[j])} <= {names[j]} <= {_num(lp.col_hi[j])}")
    ints = [names[j] for j in np.flatnonzero(problem.integral)]
    if ints:
        out.append("General")
        out.append(" " + " ".join(ints))
    out.append("End")
    return "\n".join(out) + "\n"
