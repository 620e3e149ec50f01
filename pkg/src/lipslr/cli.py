"""Command-line front end.

Exit codes: 0 eps-feasible, 1 input error, 2 infeasible (or, for ``verify``,
not eps-feasible), 3 iteration or time limit, 4 solver failure.
"""
from __future__ import annotations

import argparse
import io
import sys

import numpy as np

from . import __doc__ as _pkg_doc
from .driver import (MasterSolveError, NoProgressError, SolverConfig, export_trace, run,
                     worst_case_iterations)
from .io import (InstanceFormatError, atomic_write_text, dumps, load_json, load_point,
                 problem_from_dict)
from .model import OracleError, check_epsilon_feasible

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_LIMIT, EXIT_SOLVER = 0, 1, 2, 3, 4
STATUS_EXIT = {"eps-feasible": EXIT_OK, "infeasible": EXIT_INFEASIBLE,
               "iteration-limit": EXIT_LIMIT, "time-limit": EXIT_LIMIT}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive(s):
    v = float(s)
    if not v > 0.0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _lam(s):
    v = float(s)
    if not 0.0 < v <= 0.5:
        raise argparse.ArgumentTypeError("must lie in (0, 0.5]")
    return v


def _onoff(s):
    if s not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return s == "on"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lipslr", description=_pkg_doc)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, solving=True):
        sp.add_argument("instance", help="instance JSON")
        sp.add_argument("--epsilon", type=_positive, default=0.1)
        sp.add_argument("--lambda", dest="lam", type=_lam, default=0.25)
        if solving:
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--max-iter", type=int, default=10_000)
            sp.add_argument("--time-limit-s", type=_positive, default=1000.0)
            sp.add_argument("--trace", help="write the iteration trace CSV here")
            sp.add_argument("--out", help="write the result JSON here (default: stdout)")
            sp.add_argument("--parallel", action="store_true")
            sp.add_argument("--timings", action="store_true",
                            help="fill the wall-time columns of the trace")
            sp.add_argument("--backend", choices=("auto", "native", "highs"), default="auto")
        sp.add_argument("--lipschitz", choices=("fast", "slow"), default="fast")
        sp.add_argument("--box-filter", type=_onoff, default=None, metavar="{on,off}")

    common(sub.add_parser("solve", help="solve a generic instance"))
    common(sub.add_parser("gas", help="solve a gas network"))
    common(sub.add_parser("bilevel", help="solve a bilevel instance"))
    common(sub.add_parser("bound", help="print the worst-case iteration bound"), solving=False)
    v = sub.add_parser("verify", help="check a point for eps-feasibility")
    common(v, solving=False)
    v.add_argument("point", help="JSON list or result JSON with a point entry")
    return p


def _kind(doc) -> str:
    if isinstance(doc, dict):
        if "nodes" in doc and "arcs" in doc:
            return "gas"
        if "y_lo" in doc and "x_lo" in doc:
            return "bilevel"
    return "generic"


def _load(args, expect: str | None = None):
    """``(problem, kind, context)`` for the instance named on the command line."""
    doc = load_json(args.instance)
    kind = expect or _kind(doc)
    try:
        if kind == "gas":
            from .gas.network import GasNetwork, build_minlp
            net = GasNetwork.from_dict(doc)
            filt = True if args.box_filter is None else args.box_filter
            problem, gmap = build_minlp(net, box_filter=filt)
            return problem, kind, (net, gmap)
        if kind == "bilevel":
            from .bilevel import BilevelConfig, BilevelInstance, reformulate
            inst = BilevelInstance.from_dict(doc)
            cfg = BilevelConfig(lipschitz_mode=args.lipschitz,
                                box_filter=bool(args.box_filter))
            problem, bmap = reformulate(inst, cfg)
            return problem, kind, (inst, bmap)
        return problem_from_dict(doc), kind, None
    except InstanceFormatError as exc:
        raise InstanceFormatError(f"{args.instance}: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{args.instance}: {exc!s}") from None


def _emit(args, doc) -> None:
    text = dumps(doc)
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)


def _solve(args, expect):
    problem, kind, ctx = _load(args, expect)
    cfg = SolverConfig(epsilon=args.epsilon, lam=args.lam, max_iter=args.max_iter,
                       time_limit=args.time_limit_s, seed=args.seed, parallel=args.parallel,
                       milp_backend=args.backend)
    try:
        res = run(problem, cfg)
    except (OracleError, MasterSolveError, NoProgressError) as exc:
        print(f"lipslr: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    doc = {"status": res.status, "instance": kind,
           "point": None if res.point is None else res.point.tolist(),
           "objective": None if res.point is None else res.objective,
           "iterations": res.iterations, "oracle_calls": res.oracle_calls,
           "max_violation": None if res.report is None else res.report.max_violation,
           "variables": [v.name for v in problem.variables]}
    if res.point is not None and kind == "gas":
        from .gas.network import network_state, verify_state
        net, gmap = ctx
        state = network_state(net, res.point, gmap)
        doc["state"] = state
        doc["verification"] = verify_state(net, state, args.epsilon)
    if res.point is not None and kind == "bilevel":
        from .bilevel import PhiOracle
        inst, bmap = ctx
        x, y = res.point[bmap.x], res.point[bmap.y]
        y0 = y[:inst.ny]
        doc["x"], doc["y"] = x.tolist(), y0.tolist()
        doc["upper_objective"] = inst.upper_objective(x, y0)
        doc["lower_gap"] = bmap.instance.lower_objective(x, y) - PhiOracle(bmap.instance)(x)
        ref = inst.reference_solution
        if ref is not None:
            rx, ry = np.asarray(ref["x"], float), np.asarray(ref["y"], float)
            doc["diff_to_opt"] = float(max(np.max(np.abs(x - rx), initial=0.0),
                                           np.max(np.abs(y0 - ry), initial=0.0)))
    if args.trace:
        buf = io.StringIO(newline="")
        export_trace(res, buf, timings=args.timings)
        atomic_write_text(args.trace, buf.getvalue(), newline="")
    _emit(args, doc)
    return STATUS_EXIT[res.status]


def _bound(args):
    problem, _, _ = _load(args)
    K, depths = worst_case_iterations(problem, args.epsilon, args.lam)
    print(f"K = {K}")
    for b, s in zip(problem.nonlinearities, depths):
        print(f"S[{b.name}] = {s}")
    return EXIT_OK


def _verify(args):
    problem, kind, ctx = _load(args)
    x = load_point(args.point, problem.n)
    try:
        rep = check_epsilon_feasible(problem, x, args.epsilon)
    except OracleError as exc:
        print(f"lipslr: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    for b, v in zip(problem.nonlinearities, rep.violations):
        print(f"{b.name}: {v:.6g}")
    print(f"max violation = {rep.max_violation:.6g}")
    print(f"max linear residual = {rep.max_linear_residual:.6g}")
    ok = rep.eps_feasible and rep.max_violation <= args.epsilon
    if kind == "gas":
        from .gas.network import network_state, verify_state
        net, gmap = ctx
        chk = verify_state(net, network_state(net, x, gmap), args.epsilon)
        print(f"pipe re-evaluation max deviation = {chk['max_deviation_bar']:.6g} bar")
        ok = ok and chk["ok"]
    print("eps-feasible" if ok else "not eps-feasible")
    return EXIT_OK if ok else EXIT_INFEASIBLE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _solve(args, None)
        if args.command in ("gas", "bilevel"):
            return _solve(args, args.command)
        if args.command == "bound":
            return _bound(args)
        return _verify(args)
    except (InstanceFormatError, OSError) as exc:
        print(f"lipslr: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
