"""Problem data: variables, linear part, nonlinearity bindings and feasibility checks.

A problem reads

    min c x   s.t.  A x >= b,  lower <= x <= upper,  x_j integral for flagged j,
                    f_i(x[I_i]) = x[r_i]  for every binding i,

where each ``f_i`` is only available through evaluation and is Lipschitz on
the box spanned by the bounds of its inputs.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Callable, Sequence

import numpy as np

FEAS_TOL = 1e-6

NORM_KINDS = ("weighted-one-norm", "scaled-max-norm", "scaled-two-norm")


class OracleError(RuntimeError):
    """An oracle failed to produce a value; carries the binding identity."""

    def __init__(self, binding: str, message: str):
        super().__init__(f"binding {binding!r}: {message}")
        self.binding = binding


@dataclass(frozen=True)
class VariableSpec:
    name: str
    lower: float
    upper: float
    integral: bool = False


@dataclass(frozen=True)
class NormSpec:
    """Weighted norm on the input space of a binding.

    ``weighted-one-norm`` is ``sum w|v|``, ``scaled-max-norm`` is ``max w|v|``
    and ``scaled-two-norm`` is ``sqrt(sum (w v)^2)``.
    """

    kind: str
    weights: tuple

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        w = tuple(float(v) for v in np.atleast_1d(self.weights))
        if not all(v > 0.0 and math.isfinite(v) for v in w):
            raise ValueError("norm weights must be positive and finite")
        object.__setattr__(self, "weights", w)

    @classmethod
    def one(cls, dim: int, kind: str = "weighted-one-norm") -> "NormSpec":
        return cls(kind, (1.0,) * dim)

    @property
    def dim(self) -> int:
        return len(self.weights)

    def __call__(self, v) -> float:
        a = np.abs(np.asarray(v, dtype=float)) * np.asarray(self.weights)
        if a.size == 0:
            return 0.0
        if self.kind == "weighted-one-norm":
            return float(a.sum())
        if self.kind == "scaled-max-norm":
            return float(a.max())
        return float(math.sqrt(float(a @ a)))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "weights": list(self.weights)}


def weighted_norm(norm: NormSpec, vector) -> float:
    return norm(vector)


@dataclass
class LinearPart:
    """Objective ``c`` and rows ``A x >= b``."""

    objective: np.ndarray
    rows: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        n = self.objective.shape[0]
        self.rows = np.asarray(self.rows, dtype=float).reshape(-1, n)
        self.rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        if self.rows.shape[0] != self.rhs.shape[0]:
            raise ValueError("rows and rhs disagree in length")


@dataclass
class NonlinearityBinding:
    """Constraint ``oracle(x[inputs]) = x[output]``.

    ``local_lipschitz_hook(box)`` may return a norm valid on a sub-box; it
    replaces ``norm`` there (radius uses the same ``lipschitz`` factor).
    ``box_filter(box)`` returns False for boxes that cannot hold a feasible
    point.  ``center_only`` forces splitting at box centers.
    """

    inputs: tuple
    output: int
    oracle: Any
    lipschitz: float
    norm: NormSpec
    local_lipschitz_hook: Callable | None = None
    box_filter: Callable | None = None
    center_only: bool = False
    name: str = ""

    def __post_init__(self):
        self.inputs = tuple(int(i) for i in self.inputs)
        self.output = int(self.output)
        self.lipschitz = float(self.lipschitz)
        if not self.lipschitz >= 0.0:
            raise ValueError("Lipschitz constant must be nonnegative")
        if self.norm.dim != len(self.inputs):
            raise ValueError("norm weights must match the number of inputs")

    @property
    def dim(self) -> int:
        return len(self.inputs)


class CallCounter:
    """Thread-safe per-binding oracle call counter plus clamp diagnostics."""

    def __init__(self, n: int):
        self._lock = threading.Lock()
        self.calls = [0] * n
        self.clamped = [0] * n

    def add(self, i: int, clamped: bool = False):
        with self._lock:
            self.calls[i] += 1
            if clamped:
                self.clamped[i] += 1

    @property
    def total(self) -> int:
        return sum(self.calls)


@dataclass
class LipschitzMinlp:
    variables: list
    linear: LinearPart
    nonlinearities: list
    name: str = ""
    n_original: int | None = None
    big_m: float | None = None
    counter: CallCounter = field(init=False, repr=False)

    def __post_init__(self):
        self.variables = list(self.variables)
        self.nonlinearities = list(self.nonlinearities)
        if self.n_original is None:
            self.n_original = len(self.variables)
        self.counter = CallCounter(len(self.nonlinearities))
        # bindings sharing one oracle object share its lock
        by_oracle: dict = {}
        self._locks = [by_oracle.setdefault(id(b.oracle), threading.Lock())
                       for b in self.nonlinearities]
        for i, b in enumerate(self.nonlinearities):
            if not b.name:
                b.name = f"f{i}"

    @property
    def n(self) -> int:
        return len(self.variables)

    @cached_property
    def lower(self) -> np.ndarray:
        return np.array([v.lower for v in self.variables], dtype=float)

    @cached_property
    def upper(self) -> np.ndarray:
        return np.array([v.upper for v in self.variables], dtype=float)

    @cached_property
    def integral(self) -> np.ndarray:
        return np.array([v.integral for v in self.variables], dtype=bool)

    def input_bounds(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        idx = list(self.nonlinearities[i].inputs)
        return self.lower[idx], self.upper[idx]

    def objective_value(self, point) -> float:
        return float(self.linear.objective @ np.asarray(point, dtype=float))


def evaluate(problem: LipschitzMinlp, i: int, x_in) -> float:
    """Evaluate binding ``i`` at ``x_in`` (clamped into its input box)."""
    b = problem.nonlinearities[i]
    lo, hi = problem.input_bounds(i)
    x = np.asarray(x_in, dtype=float).reshape(-1)
    xc = np.clip(x, lo, hi)
    clamped = bool(np.any(xc != x))
    try:
        if getattr(b.oracle, "thread_safe", True):
            val = b.oracle(xc)
        else:
            with problem._locks[i]:
                val = b.oracle(xc)
    except OracleError:
        raise
    except Exception as exc:  # typed re-raise with binding identity
        raise OracleError(b.name, str(exc)) from exc
    problem.counter.add(i, clamped)
    val = float(val)
    if not math.isfinite(val):
        raise OracleError(b.name, f"non-finite value at {xc.tolist()}")
    return val


def validate(problem: LipschitzMinlp) -> list[str]:
    """Human-readable list of violated structural assumptions (empty if none)."""
    issues = []
    n = problem.n
    for j, v in enumerate(problem.variables):
        if not (math.isfinite(v.lower) and math.isfinite(v.upper)):
            issues.append(f"variable {v.name!r}: non-finite bound")
        elif v.lower > v.upper:
            issues.append(f"variable {v.name!r}: lower bound exceeds upper bound")
        if v.integral and (v.lower != math.floor(v.lower) or v.upper != math.floor(v.upper)):
            issues.append(f"variable {v.name!r}: integral variable with fractional bound")
    if problem.linear.objective.shape[0] != n or problem.linear.rows.shape[1] != n:
        issues.append("linear part dimension does not match variable count")
    outputs = {}
    for i, b in enumerate(problem.nonlinearities):
        idx = list(b.inputs) + [b.output]
        if any(j < 0 or j >= n for j in idx):
            issues.append(f"binding {b.name!r}: index out of range")
            continue
        if b.output in b.inputs:
            issues.append(f"binding {b.name!r}: output index is among its inputs")
        if len(set(b.inputs)) != len(b.inputs):
            issues.append(f"binding {b.name!r}: repeated input index")
        if any(problem.variables[j].integral for j in idx):
            issues.append(f"binding {b.name!r}: refers to an integral variable")
        if b.output in outputs:
            issues.append(f"binding {b.name!r}: duplicate output index shared with "
                          f"{outputs[b.output]!r}")
        outputs.setdefault(b.output, b.name)
    return issues


def is_nonoverlapping(problem: LipschitzMinlp) -> bool:
    seen: set = set()
    for b in problem.nonlinearities:
        idx = set(b.inputs) | {b.output}
        if idx & seen:
            return False
        seen |= idx
    return True


def make_nonoverlapping(problem: LipschitzMinlp) -> LipschitzMinlp:
    """Duplicate shared variables so binding index sets are pairwise disjoint.

    Copies are appended after the existing variables and tied to their
    originals with equality rows, so ``point[:problem.n]`` projects back.
    """
    if is_nonoverlapping(problem):
        return problem
    variables = list(problem.variables)
    rows = [r for r in problem.linear.rows]
    rhs = list(problem.linear.rhs)
    seen: set = set()
    bindings = []
    extra = []
    for b in problem.nonlinearities:
        mapping = {}
        for j in list(b.inputs) + [b.output]:
            if j in seen:
                v = variables[j]
                k = len(variables)
                variables.append(VariableSpec(f"{v.name}~{b.name}", v.lower, v.upper, v.integral))
                extra.append((k, j))
                mapping[j] = k
            else:
                seen.add(j)
        bindings.append(replace(b, inputs=tuple(mapping.get(j, j) for j in b.inputs),
                                output=mapping.get(b.output, b.output)))
    n_new = len(variables)
    c = np.concatenate([problem.linear.objective, np.zeros(n_new - problem.n)])
    rows = [np.concatenate([r, np.zeros(n_new - problem.n)]) for r in rows]
    for k, j in extra:
        r = np.zeros(n_new)
        r[k], r[j] = 1.0, -1.0
        rows.append(r)
        rows.append(-r)
        rhs.extend([0.0, 0.0])
    A = np.array(rows) if rows else np.zeros((0, n_new))
    return LipschitzMinlp(variables, LinearPart(c, A, np.array(rhs)), bindings,
                          name=problem.name, n_original=problem.n_original, big_m=problem.big_m)


@dataclass
class FeasibilityReport:
    violations: np.ndarray
    max_violation: float
    linear_residuals: np.ndarray
    bound_residuals: np.ndarray
    integrality_residuals: np.ndarray
    epsilon: float
    tolerance: float = FEAS_TOL

    @property
    def eps_feasible(self) -> bool:
        lin = max((float(np.max(a)) for a in (self.linear_residuals, self.bound_residuals,
                                              self.integrality_residuals) if a.size), default=0.0)
        return self.max_violation <= self.epsilon and lin <= self.tolerance

    @property
    def max_linear_residual(self) -> float:
        return float(np.max(self.linear_residuals)) if self.linear_residuals.size else 0.0


def check_epsilon_feasible(problem: LipschitzMinlp, point: Sequence[float], epsilon: float,
                           tolerance: float = FEAS_TOL) -> FeasibilityReport:
    """One oracle call per binding; linear rows, bounds and integrality checked too."""
    x = np.asarray(point, dtype=float).reshape(-1)
    if x.shape[0] != problem.n:
        raise ValueError(f"point has dimension {x.shape[0]}, expected {problem.n}")
    viol = np.array([abs(evaluate(problem, i, x[list(b.inputs)]) - x[b.output])
                     for i, b in enumerate(problem.nonlinearities)], dtype=float)
    lin = np.maximum(problem.linear.rhs - problem.linear.rows @ x, 0.0) \
        if problem.linear.rows.size else np.zeros(0)
    bnd = np.maximum(np.maximum(problem.lower - x, x - problem.upper), 0.0)
    integ = np.where(problem.integral, np.abs(x - np.round(x)), 0.0)
    return FeasibilityReport(viol, float(viol.max()) if viol.size else 0.0, lin, bnd, integ,
                             float(epsilon), tolerance)
