"""Lipschitz constants, box filtering and Big-M values for the bilevel reformulation."""
from __future__ import annotations

import numpy as np

from ..milp import LpProblem, solve_lp
from .instance import BilevelInstance
from .qp import box_vertices, polytope_vertices, quadratic_range_on_box

MODES = ("fast", "slow")


def _boxes(inst, x_box, y_box):
    xl, xh = (inst.x_lo, inst.x_hi) if x_box is None else x_box
    yl, yh = (inst.y_lo, inst.y_hi) if y_box is None else y_box
    return np.asarray(xl, float), np.asarray(xh, float), np.asarray(yl, float), np.asarray(yh, float)


def _joint_rows(inst, xl, xh, yl, yh):
    """``R z <= r`` for the bilevel constraint region in ``z = (x, y)``."""
    nx, ny = inst.nx, inst.ny
    n = nx + ny
    R = [np.hstack([inst.A, inst.B]), np.hstack([inst.C, inst.D]), np.eye(n), -np.eye(n)]
    r = [inst.a, inst.b, np.concatenate([xh, yh]), -np.concatenate([xl, yl])]
    return np.vstack(R), np.concatenate(r)


def region_y_vertices(inst, x_box=None, y_box=None) -> np.ndarray:
    """``y`` parts of the vertices of the constraint region restricted to the boxes."""
    xl, xh, yl, yh = _boxes(inst, x_box, y_box)
    R, r = _joint_rows(inst, xl, xh, yl, yh)
    return polytope_vertices(R, r)[:, inst.nx:]


def max_affine_norm(M, v, points) -> float:
    """``max ||M p + v||_2`` over the rows ``p`` of ``points``."""
    P = np.atleast_2d(points)
    vals = P @ np.asarray(M, float).T + v
    return float(np.sqrt(np.max(np.sum(vals * vals, axis=1)))) if P.size else 0.0


def lipschitz_f(inst: BilevelInstance, mode: str = "fast", y_box=None, x_box=None) -> float:
    """2-norm Lipschitz constant of ``1/2 y'Gl y + dl'y``.

    ``fast`` maximizes the gradient norm over the vertices of the ``y`` box,
    ``slow`` over the vertices of the constraint region (raises when empty).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    xl, xh, yl, yh = _boxes(inst, x_box, y_box)
    pts = box_vertices(yl, yh) if mode == "fast" else region_y_vertices(inst, (xl, xh), (yl, yh))
    return max_affine_norm(inst.G_l, inst.d_l, pts)


def lipschitz_phi(inst: BilevelInstance, hoffman: float, mode: str = "fast", x_box=None) -> float:
    """``L_H ||C||_2 L_f`` with ``L_f`` from :func:`lipschitz_f` over the region of ``x_box``."""
    if not hoffman > 0.0:
        raise ValueError("Hoffman constant must be positive")
    normC = float(np.linalg.norm(inst.C, 2)) if inst.C.size else 0.0
    if normC == 0.0:
        return 0.0
    return hoffman * normC * lipschitz_f(inst, mode, None, x_box)


def lipschitz_phi_box(inst: BilevelInstance, y_box=None) -> float:
    """``max ||F y||_2`` over the ``y`` box; valid when ``x`` only enters the lower objective."""
    if not inst.box_constrained_lower:
        raise ValueError("x appears in lower-level rows; the box-constrained constant does not apply")
    _, _, yl, yh = _boxes(inst, None, y_box)
    return max_affine_norm(inst.F, np.zeros(inst.nx), box_vertices(yl, yh))


def lipschitz_quadratic(Q, q, lo, hi) -> float:
    """2-norm Lipschitz constant of ``1/2 z'Qz + q'z`` on a box (vertex maximum of the gradient norm)."""
    return max_affine_norm(Q, np.asarray(q, float), box_vertices(lo, hi))


def box_filter(inst: BilevelInstance, x_box=None, y_box=None) -> bool:
    """True (keep) iff the constraint region meets the given boxes; one LP solve."""
    xl, xh, yl, yh = _boxes(inst, x_box, y_box)
    lo = np.concatenate([np.maximum(xl, inst.x_lo), np.maximum(yl, inst.y_lo)])
    hi = np.concatenate([np.minimum(xh, inst.x_hi), np.minimum(yh, inst.y_hi)])
    if np.any(lo > hi):
        return False
    R = np.vstack([np.hstack([inst.A, inst.B]), np.hstack([inst.C, inst.D])])
    r = np.concatenate([inst.a, inst.b])
    if R.shape[0] == 0:
        return True
    lp = LpProblem(np.zeros(lo.shape[0]), R, np.full(r.shape[0], -np.inf), r, lo, hi)
    return solve_lp(lp).status == "optimal"


def lower_quadratic(inst: BilevelInstance, with_x: bool):
    """``(Q, q)`` of the lower objective in ``y`` or in ``(x, y)``."""
    if not with_x:
        return inst.G_l, inst.d_l
    nx, ny = inst.nx, inst.ny
    Q = np.zeros((nx + ny, nx + ny))
    Q[:nx, nx:] = inst.F
    Q[nx:, :nx] = inst.F.T
    Q[nx:, nx:] = inst.G_l
    return Q, np.concatenate([np.zeros(nx), inst.d_l])


def bilevel_big_m(inst: BilevelInstance) -> float:
    """``max(||y+ - y-||_inf, ||x+ - x-||_inf, range of the lower objective on the box)``."""
    with_x = inst.has_bilinear
    Q, q = lower_quadratic(inst, with_x)
    lo = np.concatenate([inst.x_lo, inst.y_lo]) if with_x else inst.y_lo
    hi = np.concatenate([inst.x_hi, inst.y_hi]) if with_x else inst.y_hi
    fmin, fmax = quadratic_range_on_box(Q, q, lo, hi)
    wy = float(np.max(inst.y_hi - inst.y_lo, initial=0.0))
    wx = float(np.max(inst.x_hi - inst.x_lo, initial=0.0))
    return max(wy, wx, fmax - fmin)
