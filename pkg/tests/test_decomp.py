import numpy as np
import pytest

from multinorms.algebra import AlgebraElement, AlgebraShape
from multinorms.decomp import (
    STATEMENTS,
    Decomposition,
    equivalence_suite,
    is_hermitian,
    is_mutually_orthogonal,
    is_orthogonal_decomp,
    is_small,
)
from multinorms.module import ModuleSpace, ModuleVector, OperatorOnModule, inner, vec_norm
from multinorms.optimize import OptimizerConfig

CFG = OptimizerConfig(restarts=4, max_iters=100)


@pytest.fixture
def skew():
    return Decomposition.skew_pair((1,))


def test_constructor_validation():
    sp = ModuleSpace((1,), 2)
    one = OperatorOnModule.identity(sp)
    with pytest.raises(ValueError):
        Decomposition(sp, [])
    with pytest.raises(ValueError):
        Decomposition(sp, [one, one])
    with pytest.raises(ValueError):
        Decomposition.coordinate_split(sp, [1, 2])
    assert Decomposition(sp, [one]).n == 1


def test_skew_pair_values(skew):
    sp = skew.space
    one, zero = AlgebraElement.identity(sp.shape), AlgebraElement.zeros(sp.shape)
    x = ModuleVector.from_coords(sp, [one, one])
    y = ModuleVector.from_coords(sp, [zero, one])
    # x lies in the first summand, y in the second
    assert (skew.idempotents[0] @ x).allclose(x, 1e-15)
    assert (skew.idempotents[1] @ y).allclose(y, 1e-15)
    assert abs(vec_norm(x - y) - 1.0) <= 1e-12
    assert abs(vec_norm(x + y) - 5 ** 0.5) <= 1e-12
    assert skew.family() is None


def test_mutually_orthogonal_examples(skew):
    rng = np.random.default_rng(0)
    assert is_mutually_orthogonal(Decomposition.coordinate_split(ModuleSpace((2,), 2), [1, 1]))
    assert is_mutually_orthogonal(Decomposition.haar_rotated(ModuleSpace((2,), 3), [1, 2], rng))
    assert not is_mutually_orthogonal(skew)
    assert not is_mutually_orthogonal(Decomposition.skew_pair((2,)))


def test_hermitian_examples(skew):
    assert is_hermitian(Decomposition.coordinate_split(ModuleSpace((1,), 2), [1, 1]))
    sp = ModuleSpace((1, 2), 2)
    assert is_hermitian(Decomposition(sp, [OperatorOnModule.identity(sp)]))
    res = is_hermitian(skew)
    assert not res and res.witness is not None


def test_small_examples(skew):
    split = Decomposition.coordinate_split(ModuleSpace((1,), 2), [1, 1])
    assert is_small(split, "hilbert", samples=20, cfg=CFG)
    assert is_small(split, "star", samples=20, cfg=CFG)
    assert not is_small(skew, "hilbert", samples=20, cfg=CFG)
    with pytest.raises(ValueError):
        is_small(split, "min")


def test_orthogonal_decomp_examples(skew):
    rng = np.random.default_rng(1)
    rot = Decomposition.haar_rotated(ModuleSpace((2,), 2), [1, 1], rng)
    assert is_orthogonal_decomp(rot, "hilbert", samples=20, cfg=CFG)
    assert not is_orthogonal_decomp(skew, "hilbert", samples=20, cfg=CFG)


def test_equivalence_coordinate_split_all_true():
    d = Decomposition.coordinate_split(ModuleSpace((1,), 3), [1, 2])
    report = equivalence_suite(d, CFG, samples=40)
    assert report.all_true and report.consistent
    assert list(report.verdicts) == list(STATEMENTS)


def test_equivalence_skew_pair_all_false(skew):
    report = equivalence_suite(skew, CFG, samples=40)
    assert report.all_false and report.consistent
    assert report.to_dict()["consistent"]


def test_equivalence_haar_rotated_m2():
    d = Decomposition.haar_rotated(ModuleSpace((2,), 3), [1, 2], np.random.default_rng(2))
    assert equivalence_suite(d, CFG, samples=40).all_true


def test_non_orthogonal_idempotent_over_m2():
    # a generic oblique split is caught by every statement
    sp = ModuleSpace((2,), 1)
    e = np.array([[1.0, 0.7], [0.0, 0.0]])
    d = Decomposition(sp, [OperatorOnModule(sp, [e]), OperatorOnModule(sp, [np.eye(2) - e])])
    assert equivalence_suite(d, CFG, samples=40).all_false


def test_implication_chain_random():
    rng = np.random.default_rng(3)
    for _ in range(4):
        d = Decomposition.random_orthogonal(ModuleSpace((1, 2), 2), 2, rng)
        assert is_mutually_orthogonal(d)
        assert is_hermitian(d, seed=1, samples=50)
        assert is_small(d, "pure-state", samples=10, cfg=CFG)


def test_polarization_gives_orthogonality():
    # equal norms of x +/- y and ix +/- y force <x, y> = 0 for vectors drawn from orthogonal summands
    rng = np.random.default_rng(4)
    d = Decomposition.haar_rotated(ModuleSpace((2,), 2), [1, 1], rng)
    for _ in range(20):
        x, y = d.sample_range(0, rng), d.sample_range(1, rng)
        assert abs(vec_norm(x - y) - vec_norm(x + y)) <= 1e-10
        assert abs(vec_norm(x * 1j - y) - vec_norm(x * 1j + y)) <= 1e-10
        assert max(abs(b).max() for b in inner(x, y).data) <= 1e-10


def test_from_entries_matches_skew_pair():
    sp = ModuleSpace(AlgebraShape((1,)), 2)
    one, zero = AlgebraElement.identity(sp.shape), AlgebraElement.zeros(sp.shape)
    d = Decomposition.from_entries(sp, [[[one, zero], [one, zero]], [[zero, zero], [-one, one]]])
    ref = Decomposition.skew_pair((1,))
    for a, b in zip(d.idempotents, ref.idempotents):
        assert np.allclose(a.blocks[0], b.blocks[0])
