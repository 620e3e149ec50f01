import numpy as np
import pytest

from lipslr.bilevel import (Assumption1Error, BilevelConfig, BilevelInstance, PhiOracle,
                            eliminate_bilinear, reformulate, solve_bilevel)
from lipslr.bilevel.lipschitz import (bilevel_big_m, box_filter, lipschitz_f, lipschitz_phi,
                                      lipschitz_phi_box)
from lipslr.driver import SolverConfig
from lipslr.instances import bilevel_toy, random_lower_level

from _oracles import grid_polish_phi


def _inst(**kw):
    base = dict(x_lo=[0.0], x_hi=[1.0], y_lo=[-1.0], y_hi=[1.0], hoffman_constant=1.0)
    base.update(kw)
    return BilevelInstance(base.pop("x_lo"), base.pop("x_hi"), base.pop("y_lo"),
                           base.pop("y_hi"), **base)


def test_phi_concave():
    inst = _inst(y_lo=[-1.0], y_hi=[2.0], G_l=[[-2.0]])
    val, y = PhiOracle(inst).solve([0.5])
    assert val == pytest.approx(-4.0) and y[0] == pytest.approx(2.0)


def test_phi_interior():
    inst = _inst(y_lo=[0.0], y_hi=[3.0], G_l=[[1.0]], d_l=[-1.0])
    val, y = PhiOracle(inst).solve([0.5])
    assert val == pytest.approx(-0.5) and y[0] == pytest.approx(1.0)


def test_phi_empty_lower_level():
    inst = _inst(C=[[1.0]], D=[[1.0]], b=[-5.0])
    with pytest.raises(Assumption1Error):
        PhiOracle(inst)([0.5])


@pytest.mark.parametrize("seed", range(5))
def test_phi_matches_grid(seed):
    rng = np.random.default_rng(seed)
    inst = random_lower_level(rng, with_rows=bool(seed % 2))
    x = rng.uniform(inst.x_lo, inst.x_hi)
    ref = grid_polish_phi(inst, x, n=401 if inst.ny == 2 else 4001)
    assert PhiOracle(inst)(x) == pytest.approx(ref, abs=1e-6)


def test_lipschitz_f_examples():
    assert lipschitz_f(_inst(G_l=[[2.0]])) == pytest.approx(2.0)
    inst = _inst(y_lo=[-1.0, -1.0], y_hi=[1.0, 1.0], d_l=[3.0, 4.0])
    assert lipschitz_f(inst) == pytest.approx(5.0)
    assert lipschitz_f(inst, "slow") == pytest.approx(5.0)


def test_lipschitz_f_local_update_equality_case():
    inst = _inst(G_l=[[1.0]])
    assert lipschitz_f(inst, y_box=([-1.0], [0.0])) == pytest.approx(1.0)
    assert lipschitz_f(inst, y_box=([0.0], [1.0])) == pytest.approx(1.0)
    assert lipschitz_f(inst, y_box=([0.0], [0.5])) == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(5))
def test_lipschitz_f_grid(seed):
    rng = np.random.default_rng(seed)
    inst = random_lower_level(rng, with_rows=False)
    axes = [np.linspace(inst.y_lo[k], inst.y_hi[k], 201) for k in range(inst.ny)]
    Y = np.stack([g.reshape(-1) for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    grads = Y @ inst.G_l.T + inst.d_l
    assert lipschitz_f(inst) == pytest.approx(np.sqrt((grads ** 2).sum(1)).max(), abs=1e-6)


def test_lipschitz_phi_examples():
    assert lipschitz_phi(_inst(G_l=[[2.0]]), 1.0) == 0.0
    inst = _inst(G_l=[[2.0]], C=[[1.0]], D=[[1.0]], b=[5.0])
    assert lipschitz_phi(inst, 1.0) == pytest.approx(2.0)


def test_lipschitz_phi_box_examples():
    assert lipschitz_phi_box(_inst()) == 0.0
    inst = _inst(y_lo=[-2.0], y_hi=[1.0], F=[[1.0]])
    assert lipschitz_phi_box(inst) == pytest.approx(2.0)


def test_box_filter_examples():
    inst = BilevelInstance([0.0], [3.0], [0.0], [3.0], C=[[1.0]], D=[[1.0]], b=[1.0])
    assert not box_filter(inst, ([2.0], [3.0]), ([2.0], [3.0]))
    assert box_filter(inst, ([0.0], [0.5]), ([0.0], [0.5]))
    assert box_filter(_inst(), ([0.9], [1.0]), ([0.9], [1.0]))


def test_bilevel_big_m_examples():
    inst = BilevelInstance([0.0], [1.0], [0.0], [1.0])
    assert bilevel_big_m(inst) == pytest.approx(1.0)
    assert bilevel_big_m(_inst(G_l=[[2.0]])) == pytest.approx(2.0)


@pytest.mark.parametrize("seed", range(10))
def test_slow_not_above_fast(seed):
    inst = random_lower_level(np.random.default_rng(seed), with_rows=True)
    assert lipschitz_f(inst, "slow") <= lipschitz_f(inst, "fast") + 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_phi_certificate(seed):
    rng = np.random.default_rng(seed)
    inst = random_lower_level(rng, with_rows=True)
    L = lipschitz_phi(inst, inst.hoffman(), "fast")
    phi = PhiOracle(inst)
    for _ in range(50):
        a, b = rng.uniform(inst.x_lo, inst.x_hi), rng.uniform(inst.x_lo, inst.x_hi)
        assert abs(phi(a) - phi(b)) <= L * np.linalg.norm(a - b) + 1e-9


def test_eliminate_bilinear():
    inst = _inst(F=[[2.0]])
    out = eliminate_bilinear(inst)
    assert out.ny == 2 and not out.has_bilinear
    assert out.D.shape[0] == 2
    x, y = np.array([0.3]), np.array([0.7])
    assert out.lower_objective(x, np.array([0.7, 0.3])) == pytest.approx(inst.lower_objective(x, y))


def test_reformulate_counts():
    toy = bilevel_toy()
    prob, bmap = reformulate(toy)
    assert len(prob.nonlinearities) == 2 and prob.n == 4
    assert bmap.t is None
    toy.H_u = np.array([[2.0]])
    prob, bmap = reformulate(toy)
    assert len(prob.nonlinearities) == 3 and prob.n == 5 and bmap.t is not None


def test_reformulate_rejects_bad_instance():
    with pytest.raises(ValueError):
        reformulate(_inst(H_u=[[-1.0]]))


@pytest.mark.parametrize("mode", ["fast", "slow"])
@pytest.mark.parametrize("filt", [False, True])
def test_toy_solve(mode, filt):
    res = solve_bilevel(bilevel_toy(), SolverConfig(epsilon=1e-2, lam=0.25),
                        BilevelConfig(lipschitz_mode=mode, box_filter=filt))
    assert res.run.status == "eps-feasible"
    assert res.diff_to_opt <= 2e-2
