"""Compare the compiled kernels with the pure-Python fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Times the pipe Newton solve over a batch of points, the dense LP solve
built on the simplex kernel, a native branch-and-bound MILP solve and one
full run on the diamond gas network, each under both kernel backends.
"""
from __future__ import annotations

import argparse
import json
import statistics
import sys
import time

import numpy as np

from lipslr import _kernels
from lipslr.driver import SolverConfig, run
from lipslr.gas.network import build_minlp
from lipslr.gas.physics import GasConstants, PipeParams
from lipslr.instances import diamond_network
from lipslr.milp import LpProblem, MilpProblem, solve_lp, solve_milp


def _pipe_batch(n=20_000, seed=0):
    gc = GasConstants()
    pp = PipeParams(10_000.0, 0.5, 0.01)
    rng = np.random.default_rng(seed)
    p = rng.uniform(45e5, 75e5, n)
    flux = rng.uniform(-100.0, 100.0, n) / pp.area
    x = rng.uniform(0.0, 1.0, n)
    return p, flux, x, pp.theta, gc.rst, gc.alpha


def _random_lp(rng, m=60, n=80):
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0.0, 1.0, n)
    r = A @ x0
    return LpProblem(rng.normal(size=n), A, r - rng.uniform(0, 1, m), r + rng.uniform(0, 1, m),
                     np.zeros(n), np.ones(n))


def _random_milp(rng, m=8, n=12, k=6):
    A = rng.integers(-5, 6, size=(m, n)).astype(float)
    x0 = np.concatenate([rng.integers(0, 2, k), rng.uniform(0, 3, n - k)])
    lp = LpProblem(rng.normal(size=n), A, np.full(m, -np.inf), A @ x0 + rng.uniform(0, 2, m),
                   np.zeros(n), np.concatenate([np.ones(k), np.full(n - k, 3.0)]))
    return MilpProblem(lp, np.arange(n) < k)


def workloads():
    pipe = _pipe_batch()
    rng = np.random.default_rng(1)
    lps = [_random_lp(rng) for _ in range(20)]
    milps = [_random_milp(rng) for _ in range(20)]
    gas = build_minlp(diamond_network())[0]

    def pipes():
        _kernels.pipe_pressure_many(*pipe)

    def lp():
        for p in lps:
            solve_lp(p)

    def milp():
        for p in milps:
            solve_milp(p, backend="native")

    def gas_run():
        run(gas, SolverConfig(epsilon=0.1, lam=0.25))

    return {"pipe_newton_20k": pipes, "lp_60x80_x20": lp, "milp_12col_x20": milp,
            "gas_diamond_run": gas_run}


def bench(repeat: int = 3) -> dict:
    loads = workloads()
    out = {}
    backends = ["python"] + (["native"] if _kernels.native is not None else [])
    prev = _kernels.BACKEND
    try:
        for name, fn in loads.items():
            out[name] = {}
            for be in backends:
                _kernels.set_backend(be)
                times = []
                for _ in range(repeat):
                    t0 = time.perf_counter()
                    fn()
                    times.append(time.perf_counter() - t0)
                out[name][be] = statistics.median(times)
    finally:
        _kernels.set_backend(prev)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="also write the timings here")
    args = ap.parse_args(argv)
    res = bench(args.repeat)
    print(f"{'workload':<20} {'python [s]':>12} {'native [s]':>12} {'speedup':>9}")
    for name, t in res.items():
        py, nat = t.get("python"), t.get("native")
        sp = f"{py / nat:9.1f}" if nat else "      n/a"
        print(f"{name:<20} {py:12.4f} {nat if nat is not None else float('nan'):12.4f} {sp}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(res, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
