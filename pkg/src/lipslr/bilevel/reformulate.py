"""Single-level value-function reformulation of a bilevel instance.

Variables ``(x, y, eta1, eta2[, t])`` with rows ``A x + B y <= a``,
``C x + D y <= b``, ``eta2 <= eta1`` and bindings ``phi(x) = eta1``,
``f(y) = eta2`` and, for a quadratic upper objective, ``g(x, y) = t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..driver import RunResult, SolverConfig, run
from ..model import LinearPart, LipschitzMinlp, NonlinearityBinding, NormSpec, VariableSpec
from .instance import BilevelInstance, eliminate_bilinear
from .lipschitz import (box_filter, lipschitz_f, lipschitz_phi, lipschitz_phi_box,
                        lipschitz_quadratic, lower_quadratic)
from .oracles import PhiOracle, QuadraticOracle
from .qp import EmptyPolytopeError, quadratic_range_on_box

WEIGHT_FLOOR = 1e-12


@dataclass
class BilevelConfig:
    lipschitz_mode: str = "fast"
    box_filter: bool = False
    hoffman: float | None = None
    local_updates: bool = True
    use_bilevel_big_m: bool = False


@dataclass
class BilevelMap:
    instance: BilevelInstance  # after any bilinear elimination
    original: BilevelInstance
    x: list
    y: list
    eta1: int
    eta2: int
    t: int | None
    phi_lipschitz: float
    f_lipschitz: float


def _two_norm(L, dim):
    return NormSpec("scaled-two-norm", (max(L, WEIGHT_FLOOR),) * dim)


def reformulate(instance: BilevelInstance, config: BilevelConfig | None = None):
    """Returns ``(problem, map)``."""
    config = config or BilevelConfig()
    issues = instance.check()
    if issues:
        raise ValueError("invalid bilevel instance: " + "; ".join(issues))
    mode = config.lipschitz_mode
    use_filter = config.box_filter
    keep_bilinear = instance.has_bilinear and instance.box_constrained_lower
    inst = instance if keep_bilinear or not instance.has_bilinear else eliminate_bilinear(instance)
    nx, ny = inst.nx, inst.ny
    hoff = config.hoffman

    variables = []
    for i in range(nx):
        variables.append(VariableSpec(f"x{i}", float(inst.x_lo[i]), float(inst.x_hi[i]),
                                      bool(inst.x_integral[i])))
    for j in range(ny):
        variables.append(VariableSpec(f"y{j}", float(inst.y_lo[j]), float(inst.y_hi[j])))
    xs = list(range(nx))
    ys = list(range(nx, nx + ny))
    # continuous copies of integral upper-level variables feed the bindings
    x_in = list(xs)
    copies = []
    for i in xs:
        if inst.x_integral[i]:
            k = len(variables)
            variables.append(VariableSpec(f"x{i}c", float(inst.x_lo[i]), float(inst.x_hi[i])))
            copies.append((k, i))
            x_in[i] = k

    Qf, qf = lower_quadratic(inst, keep_bilinear)
    f_lo = np.concatenate([inst.x_lo, inst.y_lo]) if keep_bilinear else inst.y_lo
    f_hi = np.concatenate([inst.x_hi, inst.y_hi]) if keep_bilinear else inst.y_hi
    fmin, fmax = quadratic_range_on_box(Qf, qf, f_lo, f_hi)
    e1 = len(variables)
    variables.append(VariableSpec("eta1", fmin, fmax))
    e2 = len(variables)
    variables.append(VariableSpec("eta2", fmin, fmax))

    has_upper_quad = bool(np.any(inst.H_u) or np.any(inst.G_u))
    t = None
    if has_upper_quad:
        Qg = np.zeros((nx + ny, nx + ny))
        Qg[:nx, :nx] = inst.H_u
        Qg[nx:, nx:] = inst.G_u
        g_lo = np.concatenate([inst.x_lo, inst.y_lo])
        g_hi = np.concatenate([inst.x_hi, inst.y_hi])
        gmin, gmax = quadratic_range_on_box(Qg, np.zeros(nx + ny), g_lo, g_hi)
        t = len(variables)
        variables.append(VariableSpec("t", gmin, gmax))
    n = len(variables)

    rows, rhs = [], []
    for blockx, blocky, r in ((inst.A, inst.B, inst.a), (inst.C, inst.D, inst.b)):
        for k in range(r.shape[0]):
            row = np.zeros(n)
            row[xs] = -blockx[k]
            row[ys] = -blocky[k]
            rows.append(row)
            rhs.append(-r[k])
    row = np.zeros(n)
    row[e1], row[e2] = 1.0, -1.0
    rows.append(row)
    rhs.append(0.0)
    for k, i in copies:
        for s in (1.0, -1.0):
            row = np.zeros(n)
            row[k], row[i] = s, -s
            rows.append(row)
            rhs.append(0.0)
    c = np.zeros(n)
    c[xs] = inst.c_u
    c[ys] = inst.d_u
    if t is not None:
        c[t] = 1.0

    # phi binding
    phi_oracle = PhiOracle(inst)
    if keep_bilinear:
        L_phi = lipschitz_phi_box(inst)
        phi_hook = None
    else:
        if not np.any(inst.C):
            L_phi = 0.0
        else:
            hoff = inst.hoffman() if hoff is None else hoff
            L_phi = lipschitz_phi(inst, hoff, mode)
        phi_hook = None
        if mode == "slow" and config.local_updates and L_phi > 0.0:
            def phi_hook(box, inst=inst, hoff=hoff, L_all=L_phi):
                try:
                    L = lipschitz_phi(inst, hoff, "slow", (box.lower, box.upper))
                except EmptyPolytopeError:
                    L = L_all  # no feasible point over this box; keep the global constant
                return _two_norm(L, nx)

    def x_filter(box, inst=inst):
        return box_filter(inst, (box.lower, box.upper), None)

    bindings = [NonlinearityBinding(
        tuple(x_in), e1, phi_oracle, 1.0, _two_norm(L_phi, nx), phi_hook,
        x_filter if use_filter else None, center_only=True, name="phi")]

    # lower objective binding
    f_inputs = tuple(x_in + ys) if keep_bilinear else tuple(ys)
    f_oracle = QuadraticOracle(Qf, qf)
    if keep_bilinear:
        L_f = lipschitz_quadratic(Qf, qf, f_lo, f_hi)
    else:
        L_f = lipschitz_f(inst, mode)

    def f_box_parts(box):
        if keep_bilinear:
            return (box.lower[:nx], box.upper[:nx]), (box.lower[nx:], box.upper[nx:])
        return None, (box.lower, box.upper)

    def f_hook(box):
        xb, yb = f_box_parts(box)
        if keep_bilinear:
            return _two_norm(lipschitz_quadratic(Qf, qf, box.lower, box.upper), len(f_inputs))
        try:
            L = lipschitz_f(inst, mode, yb, xb)
        except EmptyPolytopeError:
            L = lipschitz_f(inst, "fast", yb, xb)  # the box vertices still bound the gradient
        return _two_norm(L, len(f_inputs))

    def f_filter(box):
        xb, yb = f_box_parts(box)
        return box_filter(inst, xb, yb)

    bindings.append(NonlinearityBinding(
        f_inputs, e2, f_oracle, 1.0, _two_norm(L_f, len(f_inputs)),
        f_hook if config.local_updates else None, f_filter if use_filter else None, name="f"))

    if t is not None:
        g_inputs = tuple(x_in + ys)
        g_oracle = QuadraticOracle(Qg, np.zeros(nx + ny))
        L_g = lipschitz_quadratic(Qg, np.zeros(nx + ny), g_lo, g_hi)

        def g_hook(box):
            return _two_norm(lipschitz_quadratic(Qg, np.zeros(nx + ny), box.lower, box.upper),
                             nx + ny)

        def g_filter(box):
            return box_filter(inst, (box.lower[:nx], box.upper[:nx]),
                              (box.lower[nx:], box.upper[nx:]))

        bindings.append(NonlinearityBinding(
            g_inputs, t, g_oracle, 1.0, _two_norm(L_g, nx + ny),
            g_hook if config.local_updates else None, g_filter if use_filter else None,
            name="g"))

    A = np.array(rows) if rows else np.zeros((0, n))
    problem = LipschitzMinlp(variables, LinearPart(c, A, np.array(rhs)), bindings, name="bilevel")
    if config.use_bilevel_big_m:
        from .lipschitz import bilevel_big_m
        m = bilevel_big_m(inst)
        if t is not None:
            m = max(m, variables[t].upper - variables[t].lower)
        problem.big_m = m
    bmap = BilevelMap(inst, instance, xs, ys, e1, e2, t, L_phi, L_f)
    return problem, bmap


@dataclass
class BilevelResult:
    run: RunResult
    x: np.ndarray | None
    y: np.ndarray | None
    upper_objective: float
    lower_gap: float  # f(y) - phi(x), at most 2 eps for an eps-feasible point
    diff_to_opt: float | None
    objective_diff: float | None

    def to_dict(self) -> dict:
        return {
            "status": self.run.status,
            "x": None if self.x is None else self.x.tolist(),
            "y": None if self.y is None else self.y.tolist(),
            "upper_objective": self.upper_objective,
            "lower_gap": self.lower_gap,
            "diff_to_opt": self.diff_to_opt,
            "objective_diff": self.objective_diff,
            "iterations": self.run.iterations,
            "oracle_calls": self.run.oracle_calls,
        }


def solve_bilevel(instance: BilevelInstance, solver: SolverConfig | None = None,
                  config: BilevelConfig | None = None) -> BilevelResult:
    """Run the relaxation method on the reformulation and report bilevel quantities.

    ``diff_to_opt`` is the max-norm distance of ``(x, y)`` to the reference
    solution when one is attached to the instance.
    """
    problem, bmap = reformulate(instance, config)
    res = run(problem, solver)
    if res.point is None:
        return BilevelResult(res, None, None, math.nan, math.nan, None, None)
    inst = bmap.instance
    x = res.point[bmap.x]
    y = res.point[bmap.y]
    phi = PhiOracle(inst)(x)
    gap = inst.lower_objective(x, y) - phi
    y0 = y[:instance.ny]
    up = instance.upper_objective(x, y0)
    diff = obj_diff = None
    ref = instance.reference_solution
    if ref is not None:
        rx = np.asarray(ref["x"], dtype=float)
        ry = np.asarray(ref["y"], dtype=float)
        diff = float(max(np.max(np.abs(x - rx), initial=0.0), np.max(np.abs(y0 - ry), initial=0.0)))
        obj_diff = up - instance.upper_objective(rx, ry)
    return BilevelResult(res, x, y0, up, float(gap), diff, obj_diff)
