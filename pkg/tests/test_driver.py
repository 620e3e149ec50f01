import io
import math

import numpy as np
import pytest

from lipslr.driver import (SolverConfig, TRACE_HEADER, export_trace, run,
                           worst_case_iterations)
from lipslr.instances import bound_instance, square_instance
from lipslr.model import (LinearPart, LipschitzMinlp, NonlinearityBinding, NormSpec,
                          VariableSpec, check_epsilon_feasible)
from lipslr.oracles import Polynomial


def test_square_example():
    p = square_instance()
    res = run(p, SolverConfig(epsilon=0.1, lam=0.5))
    assert res.status == "eps-feasible"
    x, y = res.point
    assert -0.1 - 1e-9 <= y <= 1e-9
    assert abs(x) <= math.sqrt(0.1) + 1e-6
    assert res.objective <= 1e-9
    assert check_epsilon_feasible(p, res.point, 0.1).eps_feasible


def test_infeasible_rows():
    v = [VariableSpec("x", 0, 1), VariableSpec("y", -1, 1)]
    lin = LinearPart([0.0, 1.0], [[1.0, 0.0]], [2.0])
    p = LipschitzMinlp(v, lin, [NonlinearityBinding((0,), 1, Polynomial([[1.0, [1]]]), 1.0,
                                                    NormSpec.one(1))])
    res = run(p)
    assert res.status == "infeasible" and res.iterations == 1


def test_constant_function_immediate():
    v = [VariableSpec("x", 0, 1), VariableSpec("y", -1, 1)]
    lin = LinearPart([1.0, 1.0], np.zeros((0, 2)), [])
    p = LipschitzMinlp(v, lin, [NonlinearityBinding((0,), 1, Polynomial([[0.0, []]]), 0.0,
                                                    NormSpec.one(1))])
    res = run(p)
    assert res.status == "eps-feasible" and res.iterations == 1
    assert res.point[1] == pytest.approx(0.0)


def test_bound_examples():
    K, S = worst_case_iterations(bound_instance(1), 0.1, 0.5)
    assert (K, S) == (31, [4])
    K, S = worst_case_iterations(bound_instance(1), 1.0, 0.5)
    assert (K, S) == (1, [0])
    K2, _ = worst_case_iterations(bound_instance(2), 0.1, 0.5)
    assert K2 == 2 * 31


def test_bound_run_within_K():
    res = run(bound_instance(1), SolverConfig(epsilon=0.1, lam=0.5))
    assert res.status == "eps-feasible" and res.iterations <= 31


def test_iteration_limit():
    res = run(square_instance(), SolverConfig(epsilon=1e-3, max_iter=1))
    assert res.status == "iteration-limit" and res.point is None


def test_trace_export():
    res = run(square_instance(), SolverConfig(epsilon=0.1, lam=0.25))
    buf = io.StringIO(newline="")
    export_trace(res, buf, timings=False)
    lines = buf.getvalue().split("\r\n")[:-1]
    assert lines[0] == ",".join(TRACE_HEADER)
    assert len(lines) == res.iterations + 1
    assert all(len(l.split(",")) == 8 for l in lines)
    assert lines[1].endswith(",,,")


def test_empty_trace():
    from lipslr.driver import RunResult
    buf = io.StringIO(newline="")
    export_trace(RunResult("infeasible", None, math.nan), buf)
    assert buf.getvalue() == ",".join(TRACE_HEADER) + "\r\n"


def test_shared_variables_are_duplicated():
    v = [VariableSpec("x", -1, 1), VariableSpec("y", -1, 1), VariableSpec("z", -1, 1)]
    lin = LinearPart([0.0, 1.0, 1.0], np.zeros((0, 3)), [])
    f = NonlinearityBinding((0,), 1, Polynomial([[1.0, [2]]]), 2.0, NormSpec.one(1))
    g = NonlinearityBinding((0,), 2, Polynomial([[1.0, [1]]]), 1.0, NormSpec.one(1))
    res = run(LipschitzMinlp(v, lin, [f, g]), SolverConfig(epsilon=0.05))
    assert res.status == "eps-feasible"
    assert res.point.shape == (3,)
    x, y, z = res.point
    assert abs(x * x - y) <= 0.05 + 1e-6 and abs(x - z) <= 0.05 + 1e-6


def test_invalid_config():
    with pytest.raises(ValueError):
        SolverConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        SolverConfig(lam=0.7)
