import numpy as np
import pytest

from multinorms.algebra import AlgebraElement, PureState, ShapeMismatchError, enumerate_characters, pure_state_sampler
from multinorms.localization import localize, localize_tuple, phi_tau
from multinorms.module import ModuleSpace, ModuleTuple, ModuleVector, OperatorOnModule, inner, op_norm, vec_norm
from multinorms.optimize import haar_unitary


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def test_commutative_example():
    sp = ModuleSpace((1, 1, 1), 2)
    tau = PureState(sp.shape, 1, [1.0])
    loc = localize(sp, tau)
    assert loc.dim == 2
    f = AlgebraElement.from_values([1, 2, 3])
    g = AlgebraElement.from_values([4, 5, 6])
    x = ModuleVector.from_coords(sp, [f, g])
    assert np.allclose(loc.q(x), [2, 5])


def test_vector_off_block_is_null():
    sp = ModuleSpace((2, 1), 2)
    x = ModuleVector(sp, [np.zeros((4, 2)), np.ones((2, 1))])
    loc = localize(sp, PureState(sp.shape, 0, [1.0, 0.0]))
    assert np.allclose(loc.q(x), 0)


@pytest.mark.parametrize("blocks,p", [((2,), 2), ((1, 2), 3), ((3, 1), 1)])
def test_isometry_identity(blocks, p, rng):
    sp = ModuleSpace(blocks, p)
    for _ in range(100):
        tau = pure_state_sampler(sp.shape, rng)
        loc = localize(sp, tau)
        assert loc.dim == p * sp.shape.blocks[tau.block]
        x, y = ModuleVector.random(sp, rng), ModuleVector.random(sp, rng)
        assert np.vdot(loc.q(x), loc.q(y)) == pytest.approx(tau(inner(x, y)), abs=1e-10)


def test_shape_mismatch():
    sp = ModuleSpace((2,), 2)
    with pytest.raises(ShapeMismatchError):
        localize(sp, PureState((1,), 0, [1.0]))
    loc = localize(sp, PureState((2,), 0, [1.0, 0.0]))
    with pytest.raises(ShapeMismatchError):
        phi_tau(loc, OperatorOnModule.identity(ModuleSpace((2,), 3)))
    with pytest.raises(ShapeMismatchError):
        loc.q(ModuleVector.zeros(ModuleSpace((2,), 1)))


@pytest.mark.parametrize("blocks,p", [((2,), 2), ((1, 2), 2)])
def test_phi_tau_homomorphism(blocks, p, rng):
    sp = ModuleSpace(blocks, p)
    tau = pure_state_sampler(sp.shape, rng)
    loc = localize(sp, tau)
    S, T = OperatorOnModule.random(sp, rng), OperatorOnModule.random(sp, rng)
    x = ModuleVector.random(sp, rng)
    assert np.allclose(phi_tau(loc, OperatorOnModule.identity(sp)), np.eye(loc.dim))
    assert np.allclose(phi_tau(loc, T) @ loc.q(x), loc.q(T @ x), atol=1e-10)
    assert np.allclose(phi_tau(loc, S @ T), phi_tau(loc, S) @ phi_tau(loc, T), atol=1e-10)
    assert np.allclose(phi_tau(loc, S + T), phi_tau(loc, S) + phi_tau(loc, T), atol=1e-10)
    assert np.allclose(phi_tau(loc, T.adjoint()), phi_tau(loc, T).conj().T, atol=1e-10)


def test_single_block_isometry(rng):
    sp = ModuleSpace((2,), 3)
    for _ in range(20):
        T = OperatorOnModule.random(sp, rng)
        loc = localize(sp, pure_state_sampler(sp.shape, rng))
        assert np.linalg.norm(phi_tau(loc, T), 2) == pytest.approx(op_norm(T), abs=1e-9)


def test_projection_families_map_to_families(rng):
    sp = ModuleSpace((1, 2), 2)
    us = [haar_unitary(sp.block_dim(j), rng) for j in range(2)]
    cuts = [(1, 2), (2, 4)]
    fam = []
    for i in range(2):
        blocks = []
        for j, u in enumerate(us):
            d = np.zeros(sp.block_dim(j))
            lo = 0 if i == 0 else cuts[j][0]
            hi = cuts[j][0] if i == 0 else sp.block_dim(j)
            d[lo:hi] = 1
            blocks.append(u @ np.diag(d) @ u.conj().T)
        fam.append(OperatorOnModule(sp, blocks))
    loc = localize(sp, PureState(sp.shape, 1, [0.6, 0.8]))
    mats = [phi_tau(loc, P) for P in fam]
    assert np.allclose(sum(mats), np.eye(loc.dim), atol=1e-9)
    for m in mats:
        assert np.allclose(m @ m, m, atol=1e-9) and np.allclose(m, m.conj().T, atol=1e-9)
    assert np.allclose(mats[0] @ mats[1], 0, atol=1e-9)


def test_localize_tuple(rng):
    sp = ModuleSpace((1, 1), 3)
    tau = enumerate_characters(sp.shape)[0]
    loc = localize(sp, tau)
    assert all(np.allclose(v, 0) for v in localize_tuple(loc, ModuleTuple.zeros(sp, 2)))
    x = ModuleVector.random(sp, rng)
    (img,) = localize_tuple(loc, ModuleTuple([x]))
    assert np.linalg.norm(img) == pytest.approx(np.sqrt(tau(inner(x, x)).real), abs=1e-12)
    best = max(np.linalg.norm(loc2.q(x)) for loc2 in (localize(sp, c) for c in enumerate_characters(sp.shape)))
    assert best == pytest.approx(vec_norm(x), abs=1e-12)


def test_localized_hilbert_norm_depends_on_xi():
    # the localized tuple's value changes with the state vector inside one block
    from multinorms.norms import hilbert_block
    from multinorms.optimize import DEFAULT_CONFIG, restart_rngs

    sp = ModuleSpace((2,), 1)
    x = ModuleVector(sp, [np.array([[1.0, 0.0], [0.0, 0.0]])])
    values = []
    for xi in ([1.0, 0.0], [0.0, 1.0]):
        loc = localize(sp, PureState(sp.shape, 0, xi))
        vecs = np.stack([loc.q(x), loc.q(x)])[:, :, None]
        values.append(hilbert_block(vecs, DEFAULT_CONFIG, restart_rngs(0, 4))[0])
    assert values[0] == pytest.approx(1.0) and values[1] == 0.0
