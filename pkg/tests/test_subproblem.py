import numpy as np
import pytest

from lipslr.boxes import Box, BoxPartition
from lipslr.instances import random_instance
from lipslr.model import (LinearPart, LipschitzMinlp, NonlinearityBinding, NormSpec,
                          VariableSpec)
from lipslr.oracles import Polynomial
from lipslr.subproblem import solve_all, solve_separable


def _one(oracle, d):
    v = [VariableSpec(f"x{k}", 0.0, 1.0) for k in range(d)] + [VariableSpec("y", -5, 5)]
    b = NonlinearityBinding(tuple(range(d)), d, oracle, 1.0, NormSpec.one(d))
    return LipschitzMinlp(v, LinearPart(np.zeros(d + 1), np.zeros((0, d + 1)), []), [b])


def test_center_shortcut():
    o = Polynomial([[1.0, [1, 1]]])
    p = _one(o, 2)
    r = solve_separable(p, 0, Box([0, 0], [1, 1]), 0.5, [0.9, 0.1, 3.0])
    np.testing.assert_array_equal(r.point, [0.5, 0.5])
    assert r.value == 0.25 and r.method == "center"


def test_anchor_on_graph_is_clamped():
    p = _one(Polynomial([[1.0, [1]]]), 1)
    r = solve_separable(p, 0, Box([0], [1]), 0.25, [0.9, 0.9])
    assert r.point[0] == pytest.approx(0.75)
    assert r.value == pytest.approx(0.75)


def test_square_projection_matches_grid():
    p = _one(Polynomial([[1.0, [2]]]), 1)
    r = solve_separable(p, 0, Box([0], [1]), 0.25, [0.5, -0.5])
    xs = np.arange(0.25, 0.75 + 5e-5, 1e-4)
    d = (xs - 0.5) ** 2 + (xs ** 2 + 0.5) ** 2
    best = xs[np.argmin(d)]
    assert abs(r.point[0] - best) <= 1e-3
    assert r.distance <= np.sqrt(d.min()) + 1e-9


def test_result_inside_shrunk_box_and_on_graph():
    rng = np.random.default_rng(4)
    p = random_instance(rng, n_bindings=2, max_dim=2)
    for i, b in enumerate(p.nonlinearities):
        lo, hi = p.input_bounds(i)
        box = Box(lo, hi)
        r = solve_separable(p, i, box, 0.25, rng.uniform(-1, 1, p.n))
        assert np.all(r.point >= lo + 0.25 * (hi - lo) - 1e-12)
        assert np.all(r.point <= hi - 0.25 * (hi - lo) + 1e-12)
        assert r.value == b.oracle(r.point)


def test_solve_all_single_equals_separable():
    p = _one(Polynomial([[1.0, [2]]]), 1)
    parts = [BoxPartition.create(p, 0)]
    a = solve_all(p, parts, [0], [0.2, 0.9], 0.25)
    b = solve_separable(p, 0, parts[0].boxes[0], 0.25, [0.2, 0.9])
    assert len(a) == 1
    np.testing.assert_array_equal(a[0].point, b.point)


def test_parallel_identical():
    p = random_instance(np.random.default_rng(8), n_bindings=3, max_dim=2)
    parts = [BoxPartition.create(p, i) for i in range(3)]
    anchor = np.random.default_rng(1).uniform(-1, 1, p.n)
    ser = solve_all(p, parts, [0, 0, 0], anchor, 0.25, parallel=False, seed=3, k=2)
    par = solve_all(p, parts, [0, 0, 0], anchor, 0.25, parallel=True, seed=3, k=2)
    for a, b in zip(ser, par):
        assert a.binding == b.binding
        assert np.array_equal(a.point, b.point) and a.value == b.value
