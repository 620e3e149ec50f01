import math

import numpy as np
import pytest

from lipslr.gas import (BAR, DomainError, GasConstants, GasNetwork, Pipe, PipeInfeasibleError,
                        PipeParams, build_minlp, fix_tree_flows, gas_big_m, network_state,
                        verify_state)
from lipslr.gas.physics import F, F_prime, F_second
from lipslr.driver import SolverConfig, run
from lipslr.instances import diamond_network
from lipslr.model import check_epsilon_feasible

from _oracles import mp_bisect_pout, mp_residual

GC = GasConstants()
PIPE = Pipe(PipeParams(10_000.0, 0.5, 0.01))


def test_F_zero_flux_closed_form():
    a = GC.alpha
    for p in (40e5, 60e5, 80e5):
        assert F(p, 0.0) == pytest.approx(p / a - math.log(abs(1 + a * p)) / a ** 2, rel=1e-9)
        assert F_prime(p, 0.0) == pytest.approx(p / (1 + a * p), rel=1e-12)


def test_F_derivatives_finite_difference():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = rng.uniform(30e5, 90e5)
        flux = rng.uniform(-300, 300)
        h = 1e-3 * p
        fd = (F(p + h, flux) - F(p - h, flux)) / (2 * h)
        assert fd == pytest.approx(F_prime(p, flux), rel=1e-6)
        assert F_prime(p, flux) > 0 and F_second(p, flux) > 0


def test_F_domain():
    with pytest.raises(DomainError):
        F(1.0, 1e3)
    with pytest.raises(DomainError):
        F(2 * GC.p_max, 0.0)


def test_trivial_pipe_cases():
    assert PIPE.p_out(60e5, 0.0) == 60e5
    assert PIPE.p_out(60e5, 50.0, x=0.0) == 60e5
    assert PIPE.dpv_dpu(60e5, 0.0) == pytest.approx(1.0)
    assert PIPE.dpv_dq(60e5, 0.0) == 0.0


def test_positive_flow_against_bisection():
    q = 80.0
    p = PIPE.p_out(60e5, q)
    assert p < 60e5
    flux = q / PIPE.params.area
    ref = mp_bisect_pout(60e5, flux, PIPE.params.length, PIPE.params.theta, GC.rst, GC.alpha)
    assert abs(p - ref) <= 1e-9 * ref


def test_newton_residual_random():
    rng = np.random.default_rng(1)
    for _ in range(100):
        p_u = rng.uniform(45e5, 75e5)
        q = rng.uniform(-100, 100)
        x = rng.uniform(0, PIPE.params.length)
        p = PIPE.p_out(p_u, q, x)
        res, scale = mp_residual(p, p_u, q / PIPE.params.area, x, PIPE.params.theta, GC.rst,
                                 GC.alpha)
        assert res <= 1e-10 * scale + 1e-12


def test_p_in_round_trip_and_sign():
    rng = np.random.default_rng(2)
    for _ in range(50):
        p_u = rng.uniform(45e5, 75e5)
        q = rng.uniform(-100, 100)
        p_v = PIPE.p_out(p_u, q)
        assert PIPE.p_in(p_v, q) == pytest.approx(p_u, rel=1e-8)
        assert np.sign(p_u - p_v) == np.sign(q)
    assert PIPE.p_in(55e5, 0.0) == 55e5


def test_derivatives_finite_difference():
    for p_u in np.linspace(46e5, 74e5, 20):
        for q in np.linspace(-90, 90, 20):
            h = 1e-4 * p_u
            fd_p = (PIPE.p_out(p_u + h, q) - PIPE.p_out(p_u - h, q)) / (2 * h)
            assert PIPE.dpv_dpu(p_u, q) == pytest.approx(fd_p, rel=1e-5)
            if q != 0.0:
                hq = 1e-4 * max(abs(q), 1.0)
                fd_q = (PIPE.p_out(p_u, q + hq) - PIPE.p_out(p_u, q - hq)) / (2 * hq)
                assert PIPE.dpv_dq(p_u, q) == pytest.approx(fd_q, rel=1e-5)


def test_first_order_sign_laws():
    for p_u in np.linspace(46e5, 74e5, 7):
        for q in np.linspace(-90, 90, 13):
            assert PIPE.dpv_dpu(p_u, q) > 0
            if q > 0:
                assert PIPE.dpv_dpu(p_u, q) > 1
            d = PIPE.dpv_dq(p_u, q)
            assert d < 0 if q != 0 else d == 0


def test_weights_zero_flow_box():
    w_p, w_q = PIPE.lipschitz_weights(50.0, 60.0, 0.0, 0.0)
    assert w_p == pytest.approx(1.0)
    assert w_q == pytest.approx(1e-12)


def test_weights_dominate_grid():
    rng = np.random.default_rng(3)
    for _ in range(5):
        a, b = np.sort(rng.uniform(46, 74, 2))
        c, d = np.sort(rng.uniform(-90, 90, 2))
        w_p, w_q = PIPE.lipschitz_weights(a, b, c, d)
        for pu in np.linspace(a, b, 15):
            for q in np.linspace(c, d, 15):
                assert abs(PIPE.dpv_dpu(pu * BAR, q)) <= w_p
                assert abs(PIPE.dpv_dq(pu * BAR, q)) / BAR <= w_q


def test_child_weights_not_larger():
    rng = np.random.default_rng(4)
    for _ in range(20):
        a, b = np.sort(rng.uniform(46, 74, 2))
        c, d = np.sort(rng.uniform(-90, 90, 2))
        parent = PIPE.lipschitz_weights(a, b, c, d)
        s, t = rng.uniform(a, b), rng.uniform(c, d)
        for box in ((a, s, c, t), (s, b, c, t), (a, s, t, d), (s, b, t, d)):
            child = PIPE.lipschitz_weights(*box)
            assert child[0] <= parent[0] * (1 + 1e-12)
            assert child[1] <= parent[1] * (1 + 1e-12)


def test_keep_box():
    assert PIPE.keep_box(50.0, 60.0, 0.0, 0.0, 45.0, 65.0)
    best = PIPE.p_out(60.0 * BAR, 80.0) / BAR
    assert not PIPE.keep_box(50.0, 60.0, 80.0, 90.0, best + 0.5, 75.0)
    assert PIPE.keep_box(50.0, 60.0, 80.0, 90.0, best - 0.5, 75.0)
    worst = PIPE.p_out(50.0 * BAR, -80.0) / BAR
    assert not PIPE.keep_box(50.0, 60.0, -90.0, -80.0, 40.0, worst - 0.5)
    assert PIPE.keep_box(50.0, 60.0, -90.0, -80.0, 40.0, worst + 0.5)


def _net(nodes, arcs):
    return GasNetwork.from_dict({"nodes": nodes, "arcs": arcs})


def _node(name, inj=0.0, lo=45.0, hi=75.0):
    return {"name": name, "p_min": lo, "p_max": hi, "injection": inj}


def _pipe(name, a, b, lo=-50.0, hi=50.0, length=5000.0):
    return {"name": name, "type": "pipe", "from": a, "to": b, "q_min": lo, "q_max": hi,
            "length": length, "diameter": 0.5, "friction": 0.01}


def test_fix_tree_flows_path():
    net = _net([_node("a", 5), _node("b"), _node("c", -5)], [_pipe("ab", "a", "b"),
                                                               _pipe("bc", "b", "c")])
    assert fix_tree_flows(net) == {"ab": 5.0, "bc": 5.0}


def test_fix_tree_flows_cycle():
    net = _net([_node("a"), _node("b"), _node("c")],
               [_pipe("ab", "a", "b"), _pipe("bc", "b", "c"), _pipe("ca", "c", "a")])
    assert fix_tree_flows(net) == {}


def _bridges(net):
    out = set()
    for a in net.arcs:
        rest = [b for b in net.arcs if b is not a]
        seen, stack = {a.tail}, [a.tail]
        while stack:
            u = stack.pop()
            for b in rest:
                for s, t in ((b.tail, b.head), (b.head, b.tail)):
                    if s == u and t not in seen:
                        seen.add(t)
                        stack.append(t)
        if a.head not in seen:
            out.add(a.name)
    return out


def test_fix_tree_flows_matches_bridges():
    net = diamond_network()
    assert set(fix_tree_flows(net)) == _bridges(net)


def test_fix_tree_flows_conflict():
    net = _net([_node("a", 60), _node("b", -60)], [_pipe("ab", "a", "b")])
    with pytest.raises(ValueError):
        fix_tree_flows(net)


def test_single_pipe_model():
    net = _net([_node("a", 10), _node("b", -10)], [_pipe("ab", "a", "b")])
    prob, gmap = build_minlp(net)
    assert len(prob.nonlinearities) == 1
    assert prob.nonlinearities[0].dim == 1
    assert prob.linear.rows.shape[0] == 4  # two balance equalities


def test_valve_rows():
    nodes = [_node("a", 10), _node("b"), _node("c", -10)]
    arcs = [_pipe("ab", "a", "b"),
            {"name": "v", "type": "valve", "from": "b", "to": "c", "q_min": 0.0, "q_max": 50.0}]
    prob, gmap = build_minlp(_net(nodes, arcs), fix_flows=False)
    assert int(prob.integral.sum()) == 1
    assert prob.linear.rows.shape[0] == 3 * 2 + 4


def test_diamond_construction_audit():
    net = diamond_network()
    prob, gmap = build_minlp(net)
    pipes = [a for a in net.arcs if a.kind == "pipe"]
    assert len(prob.nonlinearities) == len(pipes)
    for b, name in zip(prob.nonlinearities, gmap.pipes):
        assert b.dim == (1 if name in gmap.fixed_flows else 2)


def test_gas_big_m_formula():
    net = _net([_node("a", 10, 50, 70), _node("b", -10, 50, 70)],
               [_pipe("ab", "a", "b", 0.0, 10.0)])
    area = math.pi * 0.25 / 4
    expected = max(20.0, 10.0, GC.p_max / BAR - 50.0, 70.0 - 10.0 / area * math.sqrt(GC.rst) / BAR)
    assert gas_big_m(net) == pytest.approx(expected)
    # zero-flow pipe: the flow-width term vanishes
    net0 = _net([_node("a", 0, 50, 70), _node("b", 0, 50, 70)], [_pipe("ab", "a", "b", 0.0, 0.0)])
    assert gas_big_m(net0) == pytest.approx(GC.p_max / BAR - 50.0)


def test_pipe_binding_self_consistency():
    net = diamond_network()
    prob, gmap = build_minlp(net)
    rng = np.random.default_rng(5)
    for i, b in enumerate(prob.nonlinearities):
        lo, hi = prob.input_bounds(i)
        x = rng.uniform(lo, hi)
        pt = (prob.lower + prob.upper) / 2
        pt[list(b.inputs)] = x
        pt[b.output] = b.oracle(x)
        rep = check_epsilon_feasible(prob, pt, 0.1)
        assert rep.violations[i] <= 1e-8


def test_small_network_solve_and_verify():
    nodes = [_node("s", 20, 40, 45), _node("c"), _node("e", -20, 50, 75)]
    arcs = [{"name": "cs", "type": "compressor", "from": "s", "to": "c", "q_min": 0,
             "q_max": 50, "dp_max": 30}, _pipe("ce", "c", "e", 0, 50)]
    net = _net(nodes, arcs)
    prob, gmap = build_minlp(net)
    res = run(prob, SolverConfig(epsilon=0.1, lam=0.25))
    assert res.status == "eps-feasible"
    chk = verify_state(net, network_state(net, res.point, gmap), 0.1)
    assert chk["ok"]
