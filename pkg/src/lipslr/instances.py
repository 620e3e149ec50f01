"""Reference instances and generators used by tests, benchmarks and examples."""
from __future__ import annotations

import itertools

import numpy as np

from .model import LinearPart, LipschitzMinlp, NonlinearityBinding, NormSpec, VariableSpec
from .oracles import Polynomial, SumOfSines


def _binding(inputs, output, oracle, weights, name, kind="weighted-one-norm"):
    return NonlinearityBinding(tuple(inputs), output, oracle, 1.0, NormSpec(kind, tuple(weights)),
                               name=name)


def square_instance() -> LipschitzMinlp:
    """``min y  s.t.  y = x^2``, ``x, y in [-1, 1]``; optimum 0 at ``x = 0``."""
    variables = [VariableSpec("x", -1.0, 1.0), VariableSpec("y", -1.0, 1.0)]
    lin = LinearPart([0.0, 1.0], np.zeros((0, 2)), [])
    f = NonlinearityBinding((0,), 1, Polynomial([[1.0, [2]]]), 2.0, NormSpec.one(1), name="square")
    return LipschitzMinlp(variables, lin, [f], name="square")


def bound_instance(p: int = 1) -> LipschitzMinlp:
    """``p`` independent 1-D bindings with ``L = 1`` and unit width."""
    variables, bindings = [], []
    for i in range(p):
        variables += [VariableSpec(f"x{i}", 0.0, 1.0), VariableSpec(f"y{i}", -1.0, 2.0)]
        bindings.append(NonlinearityBinding((2 * i,), 2 * i + 1, Polynomial([[1.0, [1]]]), 1.0,
                                            NormSpec.one(1), name=f"f{i}"))
    lin = LinearPart(np.zeros(2 * p), np.zeros((0, 2 * p)), [])
    return LipschitzMinlp(variables, lin, bindings, name=f"bound-{p}")


def _random_oracle(rng, dim):
    """Random sum-of-sines or quadratic on ``[-1, 1]^dim`` with 1-norm weights and output range."""
    if dim == 1 and rng.random() < 0.4:
        c = rng.uniform(0.25, 1.0) * rng.choice([-1.0, 1.0])
        b = rng.uniform(-0.5, 0.5)
        oracle = Polynomial([[c, [2]], [b, [1]]])
        weights = [2.0 * abs(c) + abs(b)]
        bound = abs(c) + abs(b)
    else:
        amp = rng.uniform(0.2, 0.6, dim)
        freq = rng.uniform(0.5, 1.5, dim)
        phase = rng.uniform(-np.pi, np.pi, dim)
        oracle = SumOfSines(amp, freq, phase)
        weights = list(oracle.gradient_weights())
        bound = float(amp.sum())
    return oracle, weights, bound


def random_instance(rng, n_bindings: int | None = None, max_dim: int = 2, n_rows: int = 2,
                    integer: bool = False) -> LipschitzMinlp:
    """Random feasible instance with disjoint 1-D/2-D bindings on ``[-1, 1]`` inputs.

    Rows are random halfspaces containing a known graph point.  With
    ``integer`` an extra variable ``z in {0, 1, 2}`` enters every row.
    """
    p = int(rng.integers(1, 4)) if n_bindings is None else n_bindings
    variables, bindings, ref = [], [], []
    for i in range(p):
        dim = int(rng.integers(1, max_dim + 1))
        oracle, weights, bound = _random_oracle(rng, dim)
        ins = []
        for d in range(dim):
            ins.append(len(variables))
            variables.append(VariableSpec(f"x{i}_{d}", -1.0, 1.0))
        out = len(variables)
        variables.append(VariableSpec(f"y{i}", -bound - 0.25, bound + 0.25))
        bindings.append(_binding(ins, out, oracle, weights, f"f{i}"))
        xi = rng.uniform(-1.0, 1.0, dim)
        ref += list(xi) + [oracle(xi)]
    if integer:
        variables.append(VariableSpec("z", 0.0, 2.0, True))
        ref.append(float(rng.integers(0, 3)))
    n = len(variables)
    ref = np.array(ref)
    A = rng.normal(size=(n_rows, n))
    rhs = A @ ref - rng.uniform(0.0, 0.5, n_rows)
    c = rng.normal(size=n)
    return LipschitzMinlp(variables, LinearPart(c, A, rhs), bindings, name="random")


def random_suite(n: int = 20, seed: int = 0) -> list:
    """``n`` random instances with ``p <= 3`` bindings of dimension at most 2."""
    rng = np.random.default_rng(seed)
    return [random_instance(rng) for _ in range(n)]


def brute_force_suite(n: int = 10, seed: int = 1) -> list:
    """Instances small enough for :func:`grid_optimum` (at most two input coordinates)."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        if k % 2 == 0:
            inst = random_instance(rng, n_bindings=1, max_dim=2, integer=k % 4 == 0)
        else:
            inst = random_instance(rng, n_bindings=2, max_dim=1)
        out.append(inst)
    return out


def _batch(oracle, X):
    if hasattr(oracle, "batch"):
        return np.asarray(oracle.batch(X), dtype=float)
    return np.array([oracle(x) for x in X])


def grid_optimum(problem: LipschitzMinlp, resolution: float = 1e-3, chunk: int = 1 << 20):
    """Best objective of exactly feasible points on a grid over the binding inputs.

    Every variable must be a binding input, a binding output or an integer
    variable (enumerated).  Outputs are set to the oracle value, so every
    grid point that passes the rows is feasible for the original problem and
    the result is an upper bound on its optimum.  Returns ``(value, point)``;
    value is ``inf`` when no grid point is feasible.
    """
    lo, hi = problem.lower, problem.upper
    ins = [j for b in problem.nonlinearities for j in b.inputs]
    outs = [b.output for b in problem.nonlinearities]
    ints = [j for j in range(problem.n) if problem.integral[j]]
    if set(range(problem.n)) != set(ins) | set(outs) | set(ints):
        raise ValueError("grid_optimum needs every variable to be an input, output or integer")
    axes = [np.linspace(lo[j], hi[j], int(round((hi[j] - lo[j]) / resolution)) + 1) for j in ins]
    int_vals = [np.arange(lo[j], hi[j] + 0.5) for j in ints]
    A, b, c = problem.linear.rows, problem.linear.rhs, problem.linear.objective
    best, best_pt = np.inf, None
    grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1) if axes \
        else np.zeros((1, 0))
    for s in range(0, grid.shape[0], chunk):
        G = grid[s:s + chunk]
        X = np.zeros((G.shape[0], problem.n))
        X[:, ins] = G
        for bnd in problem.nonlinearities:
            X[:, bnd.output] = _batch(bnd.oracle, X[:, list(bnd.inputs)])
        ok_out = np.ones(G.shape[0], dtype=bool)
        for j in outs:
            ok_out &= (X[:, j] >= lo[j] - 1e-12) & (X[:, j] <= hi[j] + 1e-12)
        for zs in itertools.product(*int_vals):
            X[:, ints] = zs
            ok = ok_out & np.all(X @ A.T >= b - 1e-12, axis=1)
            if not ok.any():
                continue
            vals = np.where(ok, X @ c, np.inf)
            k = int(np.argmin(vals))
            if vals[k] < best:
                best, best_pt = float(vals[k]), X[k].copy()
    return best, best_pt


def infeasible_suite() -> list:
    """Five instances whose graphs stay more than 0.1 away from the linear region."""
    out = []

    def one(name, oracle, w, xlo, xhi, ylo, yhi, rows, rhs):
        dim = len(xlo)
        variables = [VariableSpec(f"x{d}", xlo[d], xhi[d]) for d in range(dim)]
        variables.append(VariableSpec("y", ylo, yhi))
        lin = LinearPart(np.zeros(dim + 1), np.array(rows, dtype=float), rhs)
        out.append(LipschitzMinlp(variables, lin, [_binding(range(dim), dim, oracle, w, "f")],
                                  name=name))

    # x^2 >= 0 but y <= -0.5
    one("square-below", Polynomial([[1.0, [2]]]), [2.0], [-1.0], [1.0], -1.0, 1.0,
        [[0.0, -1.0]], [0.5])
    # sin in [-1, 1] but y >= 1.3
    one("sine-above", SumOfSines([1.0], [3.0]), [3.0], [-1.0], [1.0], -2.0, 2.0,
        [[0.0, 1.0]], [1.3])
    # y = x but y >= x + 0.4
    one("shifted-line", Polynomial([[1.0, [1]]]), [1.0], [0.0], [1.0], -1.0, 2.0,
        [[-1.0, 1.0]], [0.4])
    # x0 x1 on [0,1]^2 but y >= 1.2
    one("product-cap", Polynomial([[1.0, [1, 1]]]), [1.0, 1.0], [0.0, 0.0], [1.0, 1.0],
        -1.0, 2.0, [[0.0, 0.0, 1.0]], [1.2])
    # sum of sines in [-1.1, 1.1]; linear rows force x0 + x1 >= 1.5 and y <= -1.0 where f >= 0
    one("sines-corner", SumOfSines([0.6, 0.5], [1.0, 1.0]), [0.6, 0.5], [0.0, 0.0], [1.0, 1.0],
        -2.0, 2.0, [[1.0, 1.0, 0.0], [0.0, 0.0, -1.0]], [1.5, 1.0])
    return out


def diamond_network():
    """Six-node network with one cycle, one compressor and a fixed-flow tree pipe."""
    from .gas.network import GasNetwork
    data = {
        "name": "diamond",
        "nodes": [
            {"name": "S", "p_min": 40.0, "p_max": 45.0, "injection": 100.0},
            {"name": "C", "p_min": 45.0, "p_max": 75.0, "injection": 0.0},
            {"name": "A", "p_min": 45.0, "p_max": 75.0, "injection": 0.0},
            {"name": "B", "p_min": 45.0, "p_max": 75.0, "injection": 0.0},
            {"name": "T", "p_min": 45.0, "p_max": 75.0, "injection": 0.0},
            {"name": "E", "p_min": 50.0, "p_max": 75.0, "injection": -100.0},
        ],
        "arcs": [
            {"name": "cs", "type": "compressor", "from": "S", "to": "C", "q_min": 0.0,
             "q_max": 100.0, "dp_max": 30.0},
            {"name": "ca", "type": "pipe", "from": "C", "to": "A", "q_min": 0.0, "q_max": 100.0,
             "length": 10000.0, "diameter": 0.5, "friction": 0.01},
            {"name": "at", "type": "pipe", "from": "A", "to": "T", "q_min": 0.0, "q_max": 100.0,
             "length": 12000.0, "diameter": 0.5, "friction": 0.01},
            {"name": "cb", "type": "pipe", "from": "C", "to": "B", "q_min": 0.0, "q_max": 100.0,
             "length": 15000.0, "diameter": 0.6, "friction": 0.01},
            {"name": "bt", "type": "pipe", "from": "B", "to": "T", "q_min": 0.0, "q_max": 100.0,
             "length": 8000.0, "diameter": 0.6, "friction": 0.01},
            {"name": "te", "type": "pipe", "from": "T", "to": "E", "q_min": 0.0, "q_max": 100.0,
             "length": 5000.0, "diameter": 0.6, "friction": 0.01},
        ],
    }
    return GasNetwork.from_dict(data)


def bilevel_toy():
    """``min 3x - y`` over ``x in [0, 2]`` where ``y`` solves ``min -y^2`` on ``[-1, x - 1/2]``.

    The lower level picks ``y = -1`` for ``x <= 3/2`` and ``y = x - 1/2``
    beyond, so the optimistic optimum is ``(x, y) = (0, -1)`` with upper
    objective 1.  The Hoffman constant of the single row is 1.
    """
    from .bilevel.instance import BilevelInstance
    return BilevelInstance(
        [0.0], [2.0], [-1.0], [2.0], c_u=[3.0], d_u=[-1.0], G_l=[[-2.0]],
        C=[[-1.0]], D=[[1.0]], b=[-0.5], reference_solution={"x": [0.0], "y": [-1.0]},
        hoffman_constant=1.0, name="toy")


def random_lower_level(rng, with_rows: bool = True):
    """Random bilevel instance with ``n_x <= 2``, ``n_y <= 2`` and an indefinite lower level.

    Rows ``C x + D y <= b`` keep ``y = y_lo`` feasible for every ``x`` so the
    lower level is never empty.  The Hoffman constant is exact: for one ``y``
    it is ``max(1, 1/min|d_i|)``; for two, the rows are axis aligned (the
    feasible set is a box whose faces move with ``x``) and the constant is 1.
    """
    from .bilevel.instance import BilevelInstance
    nx = int(rng.integers(1, 3))
    ny = int(rng.integers(1, 3))
    M = rng.normal(size=(ny, ny))
    G = 0.5 * (M + M.T)
    d = rng.normal(size=ny)
    x_lo, x_hi = -np.ones(nx), np.ones(nx)
    y_lo, y_hi = -np.ones(ny), np.ones(ny)
    kw = {}
    hoffman = 1.0
    if with_rows:
        m = int(rng.integers(1, 3))
        C = rng.normal(size=(m, nx))
        if ny == 1:
            D = rng.normal(size=(m, 1))
            hoffman = max(1.0, 1.0 / float(np.min(np.abs(D))))
        else:
            D = np.zeros((m, ny))
            D[np.arange(m), rng.integers(0, ny, m)] = rng.choice([-1.0, 1.0], m)
        # slack at y = y_lo for the worst x
        worst = np.abs(C).sum(axis=1) + D @ y_lo
        b = worst + rng.uniform(0.1, 1.0, m)
        kw = {"C": C, "D": D, "b": b}
    return BilevelInstance(x_lo, x_hi, y_lo, y_hi, c_u=rng.normal(size=nx),
                           d_u=rng.normal(size=ny), G_l=G, d_l=d, hoffman_constant=hoffman,
                           name="random", **kw)
