import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lipslr.model import (LinearPart, LipschitzMinlp, NonlinearityBinding, NormSpec,
                          OracleError, VariableSpec, check_epsilon_feasible, evaluate,
                          is_nonoverlapping, make_nonoverlapping, validate, weighted_norm)
from lipslr.oracles import Polynomial, make_oracle, oracle_from_callable


def _problem(variables, bindings, rows=None, rhs=None, c=None):
    n = len(variables)
    lin = LinearPart(np.zeros(n) if c is None else c,
                     np.zeros((0, n)) if rows is None else rows, [] if rhs is None else rhs)
    return LipschitzMinlp(variables, lin, bindings)


def _square():
    v = [VariableSpec("x", -1, 1), VariableSpec("y", -1, 1)]
    return _problem(v, [NonlinearityBinding((0,), 1, Polynomial([[1.0, [2]]]), 2.0,
                                            NormSpec.one(1), name="sq")])


def test_validate_clean():
    assert validate(_square()) == []


def test_validate_output_among_inputs():
    v = [VariableSpec("x", 0, 1), VariableSpec("y", 0, 1)]
    p = _problem(v, [NonlinearityBinding((0, 1), 1, Polynomial([[1.0, [1, 0]]]), 1.0,
                                         NormSpec.one(2), name="bad")])
    issues = validate(p)
    assert any("bad" in s and "output" in s for s in issues)


def test_validate_infinite_bound():
    v = [VariableSpec("x", 0, math.inf), VariableSpec("y", 0, 1)]
    p = _problem(v, [NonlinearityBinding((0,), 1, Polynomial([[1.0, [1]]]), 1.0,
                                         NormSpec.one(1))])
    assert any("non-finite bound" in s for s in validate(p))


def test_validate_integral_in_binding():
    v = [VariableSpec("x", 0, 1, True), VariableSpec("y", 0, 1)]
    p = _problem(v, [NonlinearityBinding((0,), 1, Polynomial([[1.0, [1]]]), 1.0,
                                         NormSpec.one(1))])
    assert any("integral" in s for s in validate(p))


def test_make_nonoverlapping_identity():
    p = _square()
    assert make_nonoverlapping(p) is p


def test_make_nonoverlapping_shared_input():
    v = [VariableSpec(n, 0, 1) for n in ("a", "b", "x3", "y1", "y2")]
    f1 = NonlinearityBinding((0, 2), 3, Polynomial([[1.0, [1, 1]]]), 1.0, NormSpec.one(2), name="g")
    f2 = NonlinearityBinding((1, 2), 4, Polynomial([[1.0, [1, 1]]]), 1.0, NormSpec.one(2), name="h")
    p = _problem(v, [f1, f2])
    q = make_nonoverlapping(p)
    assert q.n == p.n + 1
    assert q.linear.rows.shape[0] == 2  # one equality as two rows
    assert is_nonoverlapping(q)
    assert q.nonlinearities[1].inputs == (1, 5)
    row = q.linear.rows[0]
    assert row[5] == 1.0 and row[2] == -1.0
    assert validate(q) == []


def test_make_nonoverlapping_output_feeds_input():
    v = [VariableSpec(n, 0, 1) for n in ("x", "y", "z")]
    f1 = NonlinearityBinding((0,), 1, Polynomial([[1.0, [1]]]), 1.0, NormSpec.one(1))
    f2 = NonlinearityBinding((1,), 2, Polynomial([[1.0, [1]]]), 1.0, NormSpec.one(1))
    q = make_nonoverlapping(_problem(v, [f1, f2]))
    assert q.n == 4 and q.nonlinearities[1].inputs == (3,)


def test_feasibility_examples():
    p = _square()
    rep = check_epsilon_feasible(p, [0.5, 0.25], 0.1)
    assert rep.max_violation == 0.0 and rep.eps_feasible
    rep = check_epsilon_feasible(p, [0.5, 0.4], 0.1)
    assert rep.max_violation == pytest.approx(0.15)
    assert not rep.eps_feasible


def test_feasibility_linear_rows():
    v = [VariableSpec("x", -1, 1), VariableSpec("y", -1, 1)]
    p = _problem(v, [NonlinearityBinding((0,), 1, Polynomial([[1.0, [2]]]), 2.0, NormSpec.one(1))],
                 rows=[[1.0, 0.0]], rhs=[0.9])
    rep = check_epsilon_feasible(p, [0.5, 0.25], 0.1)
    assert rep.max_linear_residual == pytest.approx(0.4)
    assert not rep.eps_feasible


def test_feasibility_dimension_mismatch():
    with pytest.raises(ValueError):
        check_epsilon_feasible(_square(), [0.0], 0.1)


def test_evaluate_counts_calls():
    v = [VariableSpec("x", 0, 5), VariableSpec("y", 0, 5)]
    p = _problem(v, [NonlinearityBinding((0,), 1, Polynomial([[3.0, []]]), 0.0, NormSpec.one(1))])
    assert evaluate(p, 0, [1.7]) == 3.0
    assert p.counter.calls == [1]


def test_evaluate_sum():
    v = [VariableSpec("a", 0, 5), VariableSpec("b", 0, 5), VariableSpec("y", 0, 9)]
    p = _problem(v, [NonlinearityBinding((0, 1), 2, Polynomial([[1.0, [1, 0]], [1.0, [0, 1]]]),
                                         1.0, NormSpec.one(2))])
    assert evaluate(p, 0, [1.0, 2.0]) == 3.0


def test_evaluate_clamps_and_records():
    p = _square()
    assert evaluate(p, 0, [2.0]) == 1.0
    assert p.counter.clamped == [1]


def test_oracle_failure_is_typed():
    def boom(x):
        raise ZeroDivisionError("nope")
    v = [VariableSpec("x", 0, 1), VariableSpec("y", 0, 1)]
    p = _problem(v, [NonlinearityBinding((0,), 1, oracle_from_callable(boom), 1.0,
                                         NormSpec.one(1), name="fragile")])
    with pytest.raises(OracleError) as info:
        evaluate(p, 0, [0.5])
    assert info.value.binding == "fragile"


def test_non_finite_oracle_value():
    v = [VariableSpec("x", 0, 1), VariableSpec("y", 0, 1)]
    p = _problem(v, [NonlinearityBinding((0,), 1, oracle_from_callable(lambda x: math.nan), 1.0,
                                         NormSpec.one(1))])
    with pytest.raises(OracleError):
        evaluate(p, 0, [0.5])


@pytest.mark.parametrize("w, x, expected", [((1, 1), (3, -4), 7.0), ((2, 0.5), (1, 2), 3.0),
                                            ((1, 1), (0, 0), 0.0)])
def test_weighted_norm_examples(w, x, expected):
    assert weighted_norm(NormSpec("weighted-one-norm", w), x) == expected


def test_other_norm_kinds():
    assert NormSpec("scaled-max-norm", (2, 1))([1, -3]) == 3.0
    assert NormSpec("scaled-two-norm", (1, 1))([3, 4]) == 5.0
    with pytest.raises(ValueError):
        NormSpec("weird", (1,))
    with pytest.raises(ValueError):
        NormSpec("weighted-one-norm", (0.0,))


def test_oracle_registry_round_trip():
    o = Polynomial([[2.0, [1, 1]], [-1.0, [0, 2]]])
    o2 = make_oracle(o.to_dict()["registry"], o.to_dict()["params"])
    x = np.array([0.3, -0.7])
    assert o2(x) == o(x)
    np.testing.assert_allclose(o.batch(np.array([x, x])), [o(x), o(x)])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=4),
       st.lists(st.floats(-10, 10), min_size=1, max_size=4))
def test_norms_are_norms(a, b):
    k = min(len(a), len(b))
    a, b = np.array(a[:k]), np.array(b[:k])
    for kind in ("weighted-one-norm", "scaled-max-norm", "scaled-two-norm"):
        nrm = NormSpec(kind, tuple(np.linspace(0.5, 2.0, k)))
        assert nrm(a + b) <= nrm(a) + nrm(b) + 1e-9
        assert nrm(-a) == pytest.approx(nrm(a))
