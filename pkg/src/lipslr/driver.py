"""Successive linear relaxation loop, its worst-case iteration bound and trace export."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .boxes import BoxPartition, center
from .master import build, extract
from .milp import solve_milp
from .model import (FeasibilityReport, LipschitzMinlp, check_epsilon_feasible,
                    is_nonoverlapping, make_nonoverlapping, validate)
from .subproblem import DEFAULT_BUDGET, solve_all

TRACE_HEADER = ["k", "master_obj", "max_violation", "splits", "total_boxes",
                "master_ms", "sub_ms", "build_ms"]


class MasterSolveError(RuntimeError):
    """A master MILP could not be solved to proven optimality."""


class NoProgressError(RuntimeError):
    """A violated binding's active box could not be split."""


@dataclass
class SolverConfig:
    epsilon: float = 0.1
    lam: float = 0.25
    max_iter: int = 10_000
    time_limit: float = 1000.0
    seed: int = 0
    parallel: bool = False
    budget: int = DEFAULT_BUDGET
    milp_backend: str = "auto"

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.lam <= 0.5:
            raise ValueError("lambda must lie in (0, 1/2]")


@dataclass
class IterationRecord:
    k: int
    master_obj: float
    max_violation: float
    splits: int
    boxes: list
    master_ms: float = 0.0
    sub_ms: float = 0.0
    build_ms: float = 0.0

    @property
    def total_boxes(self) -> int:
        return int(sum(self.boxes))


@dataclass
class RunResult:
    status: str  # eps-feasible | infeasible | iteration-limit | time-limit
    point: np.ndarray | None
    objective: float
    trace: list = field(default_factory=list)
    oracle_calls: int = 0
    report: FeasibilityReport | None = None
    problem: LipschitzMinlp | None = None
    partitions: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.trace)


def run(problem: LipschitzMinlp, config: SolverConfig | None = None, observer=None) -> RunResult:
    """Refine box covers until the master point is within ``epsilon`` of every graph.

    ``observer(k, problem, partitions, point)`` is called after each master
    solve with the current (pre-split) partitions; used by checks and tests.
    """
    config = config or SolverConfig()
    n_orig = problem.n
    work = problem if is_nonoverlapping(problem) else make_nonoverlapping(problem)
    issues = validate(work)
    if issues:
        raise ValueError("invalid problem: " + "; ".join(issues))
    calls0 = work.counter.total
    t0 = time.perf_counter()
    partitions = [BoxPartition.create(work, i) for i in range(len(work.nonlinearities))]
    trace: list = []

    def finish(status, point=None, report=None):
        obj = math.nan if point is None else float(problem.linear.objective @ point)
        return RunResult(status, point, obj, trace, work.counter.total - calls0, report,
                         work, partitions)

    for k in range(config.max_iter):
        remaining = config.time_limit - (time.perf_counter() - t0)
        if remaining <= 0.0:
            return finish("time-limit")
        tb = time.perf_counter()
        model = build(work, partitions)
        tm = time.perf_counter()
        sol = solve_milp(model.milp, backend=config.milp_backend, time_limit=remaining)
        ts = time.perf_counter()
        if sol.status == "infeasible":
            trace.append(IterationRecord(k, math.nan, math.nan, 0,
                                         [len(p) for p in partitions],
                                         1e3 * (ts - tm), 0.0, 1e3 * (tm - tb)))
            return finish("infeasible")
        if sol.status != "optimal":
            if time.perf_counter() - t0 >= config.time_limit:
                return finish("time-limit")
            raise MasterSolveError(f"master at iteration {k} ended with status {sol.status!r}")
        point, chosen = extract(model, partitions, sol, work)
        if observer is not None:
            observer(k, work, partitions, point)
        report = check_epsilon_feasible(work, point, config.epsilon)
        violated = [i for i, v in enumerate(report.violations) if v > config.epsilon]
        if not violated:
            rec = IterationRecord(k, sol.objective, report.max_violation, 0,
                                  [len(p) for p in partitions], 1e3 * (ts - tm),
                                  0.0, 1e3 * (tm - tb))
            trace.append(rec)
            if not report.eps_feasible:
                raise MasterSolveError("master point violates linear rows beyond tolerance")
            return finish("eps-feasible", point[:n_orig].copy(), report)
        results = solve_all(work, partitions, chosen, point, config.lam, config.parallel,
                            which=violated, budget=config.budget, seed=config.seed, k=k)
        for res in results:
            i = res.binding
            part = partitions[i]
            j = chosen[i]
            if part.refine(work, j, res.point) is None:
                box = part.boxes[j]
                if part.refine(work, j, center(box)) is None:
                    raise NoProgressError(
                        f"binding {work.nonlinearities[i].name!r}: box {j} is degenerate "
                        f"but violation {report.violations[i]:.3g} exceeds epsilon")
        te = time.perf_counter()
        trace.append(IterationRecord(k, sol.objective, report.max_violation, len(violated),
                                     [len(p) for p in partitions], 1e3 * (ts - tm),
                                     1e3 * (te - ts), 1e3 * (tm - tb)))
    return finish("iteration-limit")


def _depth(eps: float, lw: float, lam: float) -> int:
    if lw <= 0.0 or eps / lw >= 1.0:
        return 0
    s = math.log(eps / lw) / math.log(1.0 - lam)
    return max(0, math.ceil(s - 1e-12))


def worst_case_iterations(problem: LipschitzMinlp, epsilon: float, lam: float):
    """``(K, [S_i])`` with ``K = sum_i sum_{k=0}^{S_i} 2^(k l_i)``."""
    if not epsilon > 0.0 or not 0.0 < lam <= 0.5:
        raise ValueError("need epsilon > 0 and lambda in (0, 1/2]")
    total = 0
    depths = []
    for i, b in enumerate(problem.nonlinearities):
        lo, hi = problem.input_bounds(i)
        s = _depth(epsilon, b.lipschitz * b.norm(hi - lo), lam)
        depths.append(s)
        total += sum(2 ** (k * b.dim) for k in range(s + 1))
    return total, depths


def _fmt(v: float) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))


def export_trace(result: RunResult, sink, timings: bool = True) -> None:
    """Write the iteration trace as CSV; timing cells are left empty unless ``timings``."""
    w = csv.writer(sink, lineterminator="\r\n")
    w.writerow(TRACE_HEADER)
    for r in result.trace:
        t = [f"{r.master_ms:.3f}", f"{r.sub_ms:.3f}", f"{r.build_ms:.3f}"] if timings \
            else ["", "", ""]
        w.writerow([r.k, _fmt(r.master_obj), _fmt(r.max_violation), r.splits, r.total_boxes] + t)
