import itertools

import numpy as np
import pytest

from multinorms.optimize import (
    DEFAULT_CONFIG,
    OptimizerConfig,
    count_rank_assignments,
    haar_unitary,
    polar,
    rank_assignments,
    restart_rngs,
    sphere_ascent,
    unitary_ascent,
)

FAST = OptimizerConfig(restarts=4, max_iters=200)


def test_config_validation_and_roundtrip():
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValueError):
        OptimizerConfig(step=0.0)
    with pytest.raises(ValueError):
        OptimizerConfig(seed=-1)
    cfg = DEFAULT_CONFIG.with_(seed=3)
    assert OptimizerConfig(**cfg.to_dict()) == cfg
    assert DEFAULT_CONFIG.to_dict() == {
        "restarts": 32, "max_iters": 200, "step": 0.05, "fd_step": 1e-5, "obj_tol": 1e-8, "seed": 0,
    }


def test_restart_streams_are_reproducible_and_distinct():
    a = [r.random() for r in restart_rngs(5, 3)]
    b = [r.random() for r in restart_rngs(5, 3)]
    c = [r.random() for r in restart_rngs(5, 3, salt=1)]
    assert a == b and a != c and len(set(a)) == 3


def test_haar_unitary_basics():
    rng = np.random.default_rng(0)
    u1 = haar_unitary(1, rng)
    assert u1.shape == (1, 1) and abs(abs(u1[0, 0]) - 1) < 1e-14
    for d in (2, 3, 5):
        u = haar_unitary(d, rng)
        assert np.allclose(u.conj().T @ u, np.eye(d), atol=1e-12)
    with pytest.raises(ValueError):
        haar_unitary(0, rng)


def test_haar_moment():
    rng = np.random.default_rng(2024)
    vals = [abs(haar_unitary(2, rng)[0, 0]) ** 2 for _ in range(10_000)]
    assert np.mean(vals) == pytest.approx(0.5, abs=0.02)


def test_polar_factor():
    rng = np.random.default_rng(1)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    u = polar(g)
    assert np.allclose(u.conj().T @ u, np.eye(3), atol=1e-12)
    # u^* g is the positive factor
    h = u.conj().T @ g
    assert np.allclose(h, h.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh((h + h.conj().T) / 2).min() > -1e-12


def test_unitary_ascent_trace():
    start = haar_unitary(2, np.random.default_rng(3))
    u, val = unitary_ascent(lambda U: np.trace(U).real, 2, DEFAULT_CONFIG, init=start)
    assert val == pytest.approx(2.0, abs=1e-6)
    assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-9)


def test_unitary_ascent_constant_objective_keeps_start():
    start = haar_unitary(3, np.random.default_rng(4))
    u, val = unitary_ascent(lambda U: 1.25, 3, FAST.with_(restarts=1), init=start)
    assert val == 1.25
    assert np.allclose(u, start)


def test_unitary_ascent_hilbert_objective():
    # rank-one coordinate projections rotated by U, applied to (e1, e2); the optimum is sqrt(2)
    e = np.eye(2)
    D = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]

    def f(U):
        return np.linalg.norm(sum(U @ d @ U.conj().T @ e[:, i] for i, d in enumerate(D)))

    start = haar_unitary(2, np.random.default_rng(5))
    _, val = unitary_ascent(f, 2, DEFAULT_CONFIG, init=start)
    assert val == pytest.approx(np.sqrt(2), abs=1e-6)


def test_sphere_ascent_top_eigenvalue():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    a = a + a.conj().T
    x, val = sphere_ascent(lambda v: np.vdot(v, a @ v).real, 4, DEFAULT_CONFIG)
    assert val == pytest.approx(np.linalg.eigvalsh(a)[-1], abs=1e-6)
    assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-9)


def test_sphere_ascent_dim_one():
    x, val = sphere_ascent(lambda v: 3.0 * abs(v[0]), 1, FAST)
    assert val == pytest.approx(3.0) and x.shape == (1,)


def test_ascent_monotone_in_restarts():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    f = lambda U: abs(np.trace(a @ U)) - np.linalg.norm(U[0])  # noqa: E731
    vals = [unitary_ascent(f, 3, OptimizerConfig(restarts=r, max_iters=40))[1] for r in (1, 2, 4, 8)]
    assert all(b >= a_ for a_, b in zip(vals, vals[1:]))


def test_ascent_deterministic():
    f = lambda U: np.abs(U[0, 1]) + 0.3 * np.trace(U).imag  # noqa: E731
    r1 = unitary_ascent(f, 3, FAST)
    r2 = unitary_ascent(f, 3, FAST)
    assert r1[1] == r2[1] and np.array_equal(r1[0], r2[0])


@pytest.mark.parametrize("total,parts", [(2, 2), (0, 3), (6, 3), (4, 1), (3, 4)])
def test_rank_assignments(total, parts):
    got = list(rank_assignments(total, parts))
    brute = sorted(c for c in itertools.product(range(total + 1), repeat=parts) if sum(c) == total)
    assert got == brute
    assert len(got) == count_rank_assignments(total, parts)


def test_rank_assignment_examples():
    assert list(rank_assignments(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    assert list(rank_assignments(0, 3)) == [(0, 0, 0)]
    assert count_rank_assignments(6, 3) == 28
    with pytest.raises(ValueError):
        list(rank_assignments(-1, 2))
