import json

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from multinorms.algebra import AlgebraElement, alg_norm, min_eigenvalue, positive_sqrt
from multinorms.instances import dump_instance, parse_instance
from multinorms.module import ModuleSpace, ModuleTuple, inner, sample_aco, sample_D_n, vec_norm
from multinorms.norms import (
    column_bound,
    dual_pairing,
    hilbert_multinorm,
    mu_star,
    sandwich_bounds,
    transfer_projection_certificate,
)
from multinorms.optimize import OptimizerConfig, count_rank_assignments, rank_assignments
from multinorms.report import from_json, to_json
from multinorms.suites import chain_values, check_axioms_case

SHAPES = [(1,), (2,), (1, 1), (1, 2), (3,), (1, 1, 2)]
LIGHT = OptimizerConfig(restarts=4, max_iters=100)

seeds = st.integers(0, 2**32 - 1)
shapes = st.sampled_from(SHAPES)
FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
SLOW = settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def tuple_for(shape, p, n, seed):
    return ModuleTuple.random(ModuleSpace(shape, p), n, np.random.default_rng(seed))


@FAST
@given(shapes, seeds)
def test_c_star_algebra_laws(shape, seed):
    rng = np.random.default_rng(seed)
    a, b = AlgebraElement.random(shape, rng), AlgebraElement.random(shape, rng)
    assert abs(alg_norm(a.adjoint() * a) - alg_norm(a) ** 2) <= 1e-10 * alg_norm(a) ** 2
    assert alg_norm(a * b) <= alg_norm(a) * alg_norm(b) * (1 + 1e-12) + 1e-12
    aa = a.adjoint() * a
    r = positive_sqrt(aa)
    assert alg_norm(r * r - aa) <= 1e-10 * max(1.0, alg_norm(aa))


@FAST
@given(shapes, st.integers(1, 3), seeds)
def test_inner_product_laws(shape, p, seed):
    rng = np.random.default_rng(seed)
    sp = ModuleSpace(shape, p)
    x, y = tuple_for(shape, p, 2, seed)
    a = AlgebraElement.random(shape, rng)
    assert inner(x, y * a).allclose(inner(x, y) * a, 1e-9)
    assert inner(y, x).allclose(inner(x, y).adjoint(), 1e-12)
    c = inner(x, y)
    assert min_eigenvalue(inner(y, y) * vec_norm(x) ** 2 - c.adjoint() * c) >= -1e-9
    assert sp.o_dim == p * sum(shape)


@FAST
@given(shapes, st.integers(1, 3), st.integers(1, 4), seeds)
def test_mu_star_sandwich_and_contraction(shape, p, n, seed):
    t = tuple_for(shape, p, n, seed)
    rng = np.random.default_rng(seed + 1)
    m = mu_star(t).value
    norms = [vec_norm(x) for x in t]
    assert max(norms) <= m + 1e-9 and m <= sum(norms) + 1e-9
    coeffs = [AlgebraElement.random(shape, rng) for _ in range(n)]
    assert mu_star(t.right_act(coeffs)).value <= max(alg_norm(c) for c in coeffs) * m + 1e-9


@FAST
@given(shapes, st.integers(1, 3), st.data())
def test_orthogonal_tuples_attain_max(shape, p, data):
    n = data.draw(st.integers(1, p))
    rng = np.random.default_rng(data.draw(seeds))
    sp = ModuleSpace(shape, p)
    t = sample_D_n(sp, n, rng).tuple.right_act([AlgebraElement.random(shape, rng) for _ in range(n)])
    assert abs(mu_star(t).value - max(vec_norm(x) for x in t)) <= 1e-10 * max(1.0, mu_star(t).value)


@FAST
@given(shapes, st.integers(1, 3), st.integers(1, 5), seeds)
def test_aco_is_contractive(shape, p, m_terms, seed):
    rng = np.random.default_rng(seed)
    sp = ModuleSpace(shape, p)
    n = int(rng.integers(1, p + 1))
    assert mu_star(sample_aco(sp, n, m_terms, rng)).value <= 1 + 1e-9


@SLOW
@given(shapes, st.integers(1, 2), st.integers(2, 3), seeds)
def test_chain_and_sandwich(shape, p, n, seed):
    t = tuple_for(shape, p, n, seed)
    h, s, ps = chain_values(t, LIGHT)
    lo, hi = sandwich_bounds(t)
    cb = column_bound(t)
    for est in (h, s, ps):
        assert lo - 1e-9 <= est.value <= min(hi, cb) + 1e-9
    assert h.value <= s.value + 1e-7
    assert h.value <= ps.value + 1e-7


@SLOW
@given(shapes, st.integers(1, 2), st.integers(2, 3), seeds, st.sampled_from([1e-3, 1e-6, 1e-9]))
def test_projection_transfer(shape, p, n, seed, eps):
    t = tuple_for(shape, p, n, seed)
    fam = hilbert_multinorm(t, LIGHT).certificate
    y = transfer_projection_certificate(fam, t, eps)
    assert mu_star(y).value <= 1 + 1e-9
    assert alg_norm(dual_pairing(y, t)) >= fam.evaluate(t) ** 2 - eps - 1e-10


@SLOW
@given(seeds)
def test_axioms_with_shared_certificates(seed):
    res = check_axioms_case(0, np.random.default_rng(seed), LIGHT)
    assert res.passed, [c.to_dict() for c in res.checks if not c.passed]


@FAST
@given(st.integers(0, 7), st.integers(1, 4))
def test_rank_assignments_count(total, parts):
    got = list(rank_assignments(total, parts))
    assert len(got) == len(set(got)) == count_rank_assignments(total, parts)
    assert all(sum(g) == total and min(g) >= 0 for g in got)
    assert got == sorted(got)


json_scalars = st.one_of(
    st.none(), st.booleans(), st.integers(-10**12, 10**12),
    st.floats(allow_nan=False, allow_infinity=False), st.text(max_size=8),
)
json_docs = st.recursive(
    json_scalars,
    lambda inner_: st.lists(inner_, max_size=4) | st.dictionaries(st.text(max_size=5), inner_, max_size=4),
    max_leaves=20,
)


@FAST
@given(st.dictionaries(st.text(max_size=5), json_docs, max_size=5))
def test_report_json_roundtrip(doc):
    text = to_json(doc)
    assert from_json(text) == doc
    assert to_json(from_json(text)) == text


@FAST
@given(shapes, st.integers(1, 3), st.integers(1, 3), seeds)
def test_instance_roundtrip(shape, p, n, seed):
    t = tuple_for(shape, p, n, seed)
    inst = parse_instance(json.loads(json.dumps(dump_instance(t))))
    assert all(a.allclose(b, 0.0) for a, b in zip(inst.tuple, t))
