import json

import numpy as np
import pytest

from lipslr.instances import random_instance, square_instance
from lipslr.io import (InstanceFormatError, atomic_write_text, dumps, load_point,
                       problem_from_dict, problem_to_dict)


def test_round_trip():
    p = random_instance(np.random.default_rng(0), n_bindings=3, integer=True)
    q = problem_from_dict(json.loads(dumps(problem_to_dict(p))))
    assert [v.name for v in q.variables] == [v.name for v in p.variables]
    np.testing.assert_array_equal(q.lower, p.lower)
    np.testing.assert_array_equal(q.integral, p.integral)
    np.testing.assert_allclose(q.linear.rows, p.linear.rows)
    x = np.random.default_rng(1).uniform(-1, 1, 2)
    for a, b in zip(p.nonlinearities, q.nonlinearities):
        xi = x[:a.dim]
        assert a.oracle(xi) == b.oracle(xi)
        assert a.norm == b.norm


def test_senses():
    doc = problem_to_dict(square_instance())
    doc["constraints"] = [{"coefficients": {"x": 1.0}, "sense": "eq", "rhs": 0.5},
                          {"coefficients": {"y": 1.0}, "sense": "leq", "rhs": 0.3}]
    p = problem_from_dict(doc)
    np.testing.assert_array_equal(p.linear.rows, [[1, 0], [-1, 0], [0, -1]])
    np.testing.assert_array_equal(p.linear.rhs, [0.5, -0.5, -0.3])


@pytest.mark.parametrize("mutate, where", [
    (lambda d: d["variables"][0].pop("lb"), "variables[0]"),
    (lambda d: d["nonlinearities"][0].update(output="nope"), "nonlinearities[0]"),
    (lambda d: d["nonlinearities"][0]["oracle"].update(registry="nope"), "nonlinearities[0]"),
    (lambda d: d.update(constraints=[{"coefficients": {"x": 1}, "sense": "gt", "rhs": 0}]),
     "constraints[0]"),
])
def test_errors_name_location(mutate, where):
    doc = problem_to_dict(square_instance())
    mutate(doc)
    with pytest.raises(InstanceFormatError, match=where.replace("[", r"\[")):
        problem_from_dict(doc)


def test_dumps_deterministic_and_nan():
    assert dumps({"b": float("nan"), "a": np.float64(1.5)}) == '{\n  "a": 1.5,\n  "b": null\n}\n'


def test_atomic_write(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write_text(target, "a\r\nb\r\n", newline="")
    assert target.read_bytes() == b"a\r\nb\r\n"
    assert [f.name for f in tmp_path.iterdir()] == ["out.txt"]


def test_load_point(tmp_path):
    f = tmp_path / "pt.json"
    f.write_text('{"point": [1, 2]}')
    np.testing.assert_array_equal(load_point(f, 2), [1.0, 2.0])
    with pytest.raises(InstanceFormatError):
        load_point(f, 3)
    f.write_text("[1, 2")
    with pytest.raises(InstanceFormatError, match="line 1"):
        load_point(f)
