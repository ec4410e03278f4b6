"""Property suites run by ``multinorms verify``.

Each suite draws seeded random instances and records one :class:`Check` per asserted
property.  Instances come from ``default_rng([seed, salt, case])`` so every case is
reproducible on its own.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import AlgebraElement, AlgebraShape, PureState, alg_norm, unit_vector
from .decomp import Decomposition, equivalence_suite
from .localization import localize, phi_tau
from .module import (
    ModuleSpace,
    ModuleTuple,
    ModuleVector,
    OperatorOnModule,
    inner,
    lemma_base_transform,
    op_norm,
    orthonormal_basis,
    reconstruct,
    sample_aco,
    sample_D_n,
    vec_norm,
)
from .norms import (
    DualTuple,
    LocalizedFamily,
    ProjectionFamily,
    hilbert_multinorm,
    merge_duplicate_certificate,
    min_multinorm,
    mu_star,
    mu_star_sampled,
    purestate_multinorm,
    star_multinorm,
    two_two_multinorm,
)
from .optimize import DEFAULT_CONFIG, OptimizerConfig

REL_TOL = 1e-4


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, **self.detail}


@dataclass
class CaseResult:
    index: int
    label: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, **detail) -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def leq(self, name: str, lhs: float, rhs: float, tol: float) -> None:
        self.add(name, lhs <= rhs + tol, lhs=float(lhs), rhs=float(rhs), tol=float(tol))

    def close(self, name: str, a: float, b: float, tol: float, relative: bool = False) -> None:
        scale = max(abs(a), abs(b), 1e-300) if relative else 1.0
        self.add(name, abs(a - b) <= tol * scale, lhs=float(a), rhs=float(b), tol=float(tol), relative=relative)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "label": self.label,
            "passed": self.passed,
            "failed": ";".join(c.name for c in self.checks if not c.passed),
            "n_checks": len(self.checks),
            "checks": [c.to_dict() for c in self.checks],
        }


@dataclass
class SuiteResult:
    suite: str
    seed: int
    cfg: OptimizerConfig
    tol: float | None
    cases: list[CaseResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def to_dict(self) -> dict:
        return {
            "command": "verify",
            "suite": self.suite,
            "seed": self.seed,
            "tol": self.tol,
            "cfg": self.cfg.to_dict(),
            "passed": self.passed,
            "cases": [c.to_dict() for c in self.cases],
        }


@dataclass(frozen=True)
class SuiteOptions:
    seed: int = 0
    tol: float | None = None
    restarts: int | None = None
    cases: int | None = None

    def cfg(self, base: OptimizerConfig = DEFAULT_CONFIG) -> OptimizerConfig:
        cfg = base.with_(seed=self.seed)
        return cfg.with_(restarts=self.restarts) if self.restarts else cfg

    def rel_tol(self) -> float:
        return REL_TOL if self.tol is None else self.tol


def case_rng(seed: int, salt: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, salt, index])


def random_instance(rng, shapes, max_dim=8, p_max=4, n_range=(2, 4)) -> ModuleTuple:
    shape = AlgebraShape(shapes[int(rng.integers(len(shapes)))])
    p_cap = max(1, min(p_max, max_dim // max(shape.blocks)))
    p = int(rng.integers(1, p_cap + 1))
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    return ModuleTuple.random(ModuleSpace(shape, p), n, rng)


def _label(t: ModuleTuple) -> str:
    return f"blocks={list(t.space.shape.blocks)} p={t.space.rank} n={len(t)}"


# ---------------------------------------------------------------------------
# mu-star identities


def check_mu_star_case(index: int, rng: np.random.Generator, samples: int = 300) -> CaseResult:
    shapes = [(1,), (2,), (1, 1, 2)]
    t = random_instance(rng, shapes, p_max=4, n_range=(1, 4))
    res = CaseResult(index, _label(t))
    exact = mu_star(t).value
    sampled = mu_star_sampled(t, samples, rng)
    polished = mu_star_sampled(t, samples, rng, polish=True)
    res.leq("sampled_below_exact", sampled, exact, 1e-9)
    res.leq("polished_below_exact", polished, exact, 1e-9)
    res.leq("polished_reaches_exact", (1 - 1e-4) * exact, polished, 0.0)
    norms = [vec_norm(x) for x in t]
    res.leq("sandwich_lower", max(norms), exact, 1e-9)
    res.leq("sandwich_upper", exact, sum(norms), 1e-9)
    coeffs = [AlgebraElement.random(t.space.shape, rng) for _ in t]
    res.leq(
        "right_action_contraction",
        mu_star(t.right_act(coeffs)).value,
        max(alg_norm(a) for a in coeffs) * exact,
        1e-9,
    )
    n = len(t)
    if n <= t.space.rank:
        v = sample_D_n(t.space, n, rng).tuple
        ortho = v.right_act([AlgebraElement.random(t.space.shape, rng) for _ in range(n)])
        res.close("orthogonal_tuple_max", mu_star(ortho).value, max(vec_norm(x) for x in ortho), 1e-10)
    for m_terms in (1, 2, 3, 5):
        aco = sample_aco(t.space, min(n, t.space.rank), m_terms, rng)
        res.leq(f"aco_mu_star_m{m_terms}", mu_star(aco).value, 1.0, 1e-9)
    return res


def suite_mu_star(opts: SuiteOptions) -> SuiteResult:
    out = SuiteResult("mu-star-identities", opts.seed, opts.cfg(), opts.tol)
    for i in range(25 if opts.cases is None else opts.cases):
        out.cases.append(_timed(check_mu_star_case, i, case_rng(opts.seed, 1, i)))
    return out


# ---------------------------------------------------------------------------
# axioms with shared certificates


def _cert_value(cert, t: ModuleTuple) -> float:
    return float(cert.evaluate(t))


def _permute(cert, perm):
    if isinstance(cert, ProjectionFamily):
        return cert.permuted(perm)
    if isinstance(cert, DualTuple):
        return DualTuple(cert.y.permuted(perm))
    return LocalizedFamily(cert.state, tuple(cert.projections[i] for i in perm))


def _append_zero(cert):
    if isinstance(cert, ProjectionFamily):
        return ProjectionFamily(cert.projections + (OperatorOnModule.zeros(cert.space),))
    if isinstance(cert, DualTuple):
        return DualTuple(cert.y.appended(ModuleVector.zeros(cert.y.space)))
    return LocalizedFamily(cert.state, cert.projections + (np.zeros_like(cert.projections[0]),))


def _fold_last(cert, x_last: ModuleVector | None = None, eps: float = 0.0):
    """Shorten a certificate by one slot: merge the last two projections, or drop / merge the last dual vector."""
    if isinstance(cert, ProjectionFamily):
        ps = cert.projections
        return ProjectionFamily(ps[:-2] + (ps[-2] + ps[-1],))
    if isinstance(cert, DualTuple):
        if x_last is None:
            return DualTuple(cert.y[:-1])
        return DualTuple(merge_duplicate_certificate(cert.y, x_last, eps))
    ps = cert.projections
    return LocalizedFamily(cert.state, ps[:-2] + (ps[-2] + ps[-1],))


def _pooled(left, right, cert_l, cert_r, to_right, to_left) -> tuple[float, float]:
    """Best values on both sides after mapping each certificate across and back."""
    pool_l = [cert_l, to_left(cert_r), to_left(to_right(cert_l))]
    pool_r = [cert_r, to_right(cert_l), to_right(to_left(cert_r))]
    return max(_cert_value(c, left) for c in pool_l), max(_cert_value(c, right) for c in pool_r)


OPTIMIZER_NORMS = {
    "hilbert": hilbert_multinorm,
    "star": star_multinorm,
    "pure-state": purestate_multinorm,
}


def check_axioms_case(index: int, rng: np.random.Generator, cfg: OptimizerConfig) -> CaseResult:
    t = random_instance(rng, [(1,), (2,), (1, 1), (1, 2)], max_dim=4, p_max=3, n_range=(2, 3))
    res = CaseResult(index, _label(t))
    n = len(t)
    perm = list(rng.permutation(n))
    inv = list(np.argsort(perm))
    alphas = [complex(z) for z in rng.uniform(0, 1, n) * np.exp(2j * np.pi * rng.uniform(size=n))]
    amax = max(abs(a) for a in alphas)
    tp = t.permuted(perm)
    ta = ModuleTuple([x * a for x, a in zip(t, alphas)], t.space)
    tz = t.appended(ModuleVector.zeros(t.space))
    td = t.appended(t[n - 1])

    # exact norms
    for name, fn in (("mu-star", lambda s: mu_star(s).value), ("min", lambda s: min_multinorm(s).value)):
        v = fn(t)
        res.close(f"{name}_A1", fn(tp), v, 1e-12 * max(1.0, v))
        res.leq(f"{name}_A2", fn(ta), amax * v, 1e-9)
        res.close(f"{name}_A3", fn(tz), v, 1e-9)
    res.close("min_A4", min_multinorm(td).value, min_multinorm(t).value, 1e-9)

    for name, fn in OPTIMIZER_NORMS.items():
        c = fn(t, cfg).certificate
        cp = fn(tp, cfg).certificate
        ca = fn(ta, cfg).certificate
        cz = fn(tz, cfg).certificate
        cd = fn(td, cfg).certificate
        v, vp = _pooled(t, tp, c, cp, lambda k: _permute(k, perm), lambda k: _permute(k, inv))
        res.close(f"{name}_A1", vp, v, 1e-7)
        v, va = _pooled(t, ta, c, ca, lambda k: k, lambda k: k)
        res.leq(f"{name}_A2", va, amax * v, 1e-7)
        v, vz = _pooled(t, tz, c, cz, _append_zero, _fold_last)
        res.close(f"{name}_A3", vz, v, 1e-7)
        if name == "star":
            eps = 1e-7 * max(1.0, vec_norm(t[n - 1]) ** 2)
            v, vd = _pooled(t, td, c, cd, _append_zero, lambda k: _fold_last(k, t[n - 1], eps))
            res.close(f"{name}_A4", vd, v, 1e-6)
        else:
            v, vd = _pooled(t, td, c, cd, _append_zero, _fold_last)
            res.close(f"{name}_A4", vd, v, 1e-7)
    return res


def suite_axioms(opts: SuiteOptions) -> SuiteResult:
    cfg = opts.cfg(DEFAULT_CONFIG.with_(restarts=4, max_iters=100))
    out = SuiteResult("axioms", opts.seed, cfg, opts.tol)
    for i in range(25 if opts.cases is None else opts.cases):
        out.cases.append(_timed(check_axioms_case, i, case_rng(opts.seed, 2, i), cfg))
    return out


# ---------------------------------------------------------------------------
# inequality chain


def chain_values(t: ModuleTuple, cfg: OptimizerConfig):
    h = hilbert_multinorm(t, cfg)
    s = star_multinorm(t, cfg, seeds=[h.certificate])
    ps = purestate_multinorm(t, cfg, seeds=[h.certificate])
    return h, s, ps


def check_chain_case(index: int, rng: np.random.Generator, cfg: OptimizerConfig, rel_tol: float) -> CaseResult:
    commutative = index % 2 == 1
    if commutative:
        m = int(rng.integers(1, 4))
        n = int(rng.integers(2, 4))
        p = int(rng.integers(n, 5))
        t = ModuleTuple.random(ModuleSpace(AlgebraShape((1,) * m), p), n, rng)
    else:
        t = random_instance(rng, [(2,), (1, 2), (3,), (1, 1, 2)], p_max=3, n_range=(2, 4))
    res = CaseResult(index, _label(t))
    h, s, ps = chain_values(t, cfg)
    res.leq("hilbert_le_star", h.value, s.value, 1e-7)
    res.leq("hilbert_le_pure_state", h.value, ps.value, 1e-7)
    if t.space.shape.is_commutative and t.space.rank >= len(t):
        res.leq("star_le_pure_state", s.value, ps.value, rel_tol * ps.value)
    return res


def suite_chain(opts: SuiteOptions) -> SuiteResult:
    cfg = opts.cfg()
    out = SuiteResult("inequality-chain", opts.seed, cfg, opts.tol)
    for i in range(25 if opts.cases is None else opts.cases):
        out.cases.append(_timed(check_chain_case, i, case_rng(opts.seed, 3, i), cfg, opts.rel_tol()))
    return out


# ---------------------------------------------------------------------------
# commutative examples


def check_commutative_case(index: int, rng: np.random.Generator, cfg: OptimizerConfig, rel_tol: float) -> CaseResult:
    m = int(rng.integers(1, 4))
    n = int(rng.integers(1, 4))
    shape = AlgebraShape((1,) * m)
    # l^2_n(C^m) with an n-tuple
    t = ModuleTuple.random(ModuleSpace(shape, n), n, rng)
    res = CaseResult(index, f"m={m} n={n}")
    h, s, ps = chain_values(t, cfg)
    res.close("l2_hilbert_eq_star", h.value, s.value, rel_tol, relative=True)
    res.close("l2_hilbert_eq_pure_state", h.value, ps.value, rel_tol, relative=True)
    # X = A
    a = ModuleTuple.random(ModuleSpace(shape, 1), int(rng.integers(1, 4)), rng)
    target = max(float(np.max(np.abs(np.concatenate([b.ravel() for b in x.blocks])))) for x in a)
    ha, sa, pa = chain_values(a, cfg)
    res.close("algebra_hilbert", ha.value, target, 1e-6)
    res.close("algebra_star", sa.value, target, 1e-6)
    res.close("algebra_pure_state", pa.value, target, 1e-6)
    return res


def suite_commutative(opts: SuiteOptions) -> SuiteResult:
    cfg = opts.cfg()
    out = SuiteResult("commutative-examples", opts.seed, cfg, opts.tol)
    for i in range(25 if opts.cases is None else opts.cases):
        out.cases.append(_timed(check_commutative_case, i, case_rng(opts.seed, 4, i), cfg, opts.rel_tol()))
    return out


# ---------------------------------------------------------------------------
# K(H) theorems


def check_kh_case(index: int, rng: np.random.Generator, cfg: OptimizerConfig, rel_tol: float, p: int, n: int) -> CaseResult:
    space = ModuleSpace(AlgebraShape((2,)), p)
    t = ModuleTuple.random(space, n, rng)
    res = CaseResult(index, _label(t))
    h, s, ps = chain_values(t, cfg)
    res.close("hilbert_eq_pure_state", h.value, ps.value, rel_tol, relative=True)
    if p >= n:
        res.close("hilbert_eq_star", h.value, s.value, rel_tol, relative=True)
    T = OperatorOnModule.random(space, rng)
    tau = PureState(space.shape, 0, unit_vector(2, rng))
    loc = localize(space, tau)
    res.close("localized_operator_isometry", op_norm(T), float(np.linalg.norm(phi_tau(loc, T), 2)), 1e-9)
    return res


KH_GRID = [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2)]


def suite_kh(opts: SuiteOptions) -> SuiteResult:
    cfg = opts.cfg()
    out = SuiteResult("kh-theorems", opts.seed, cfg, opts.tol)
    for i in range(len(KH_GRID) * 2 if opts.cases is None else opts.cases):
        p, n = KH_GRID[i % len(KH_GRID)]
        out.cases.append(_timed(check_kh_case, i, case_rng(opts.seed, 5, i), cfg, opts.rel_tol(), p, n))
    return out


# ---------------------------------------------------------------------------
# decomposition theorem


def decomposition_cases(seed: int, count: int) -> list[tuple[str, Decomposition]]:
    """Case 0 is the skew pair; the rest cycle through orthogonal constructions."""
    out: list[tuple[str, Decomposition]] = []
    if count <= 0:
        return out
    out.append(("skew pair over C", Decomposition.skew_pair((1,))))
    makers = [
        ("coordinate split", lambda r: Decomposition.coordinate_split(ModuleSpace(AlgebraShape((1,)), 3), [1, 2])),
        ("haar rotated over M2, p=3", lambda r: Decomposition.haar_rotated(ModuleSpace(AlgebraShape((2,)), 3), [1, 2], r)),
        ("multi-block random", lambda r: Decomposition.random_orthogonal(ModuleSpace(AlgebraShape((1, 2)), 2), 3, r)),
        ("coordinate split with zero summand", lambda r: Decomposition.coordinate_split(ModuleSpace(AlgebraShape((1, 1)), 2), [1, 0, 1])),
        ("haar rotated over C^2", lambda r: Decomposition.haar_rotated(ModuleSpace(AlgebraShape((1, 1)), 3), [1, 1, 1], r)),
    ]
    for i in range(1, count):
        label, make = makers[(i - 1) % len(makers)]
        out.append((label, make(case_rng(seed, 6, i))))
    return out


def check_decomposition_case(index: int, label: str, d: Decomposition, cfg: OptimizerConfig) -> CaseResult:
    res = CaseResult(index, label)
    report = equivalence_suite(d, cfg)
    res.add("statements_agree", report.consistent, verdicts=dict(report.verdicts))
    if index == 0:
        res.add("all_false", report.all_false)
        x = ModuleVector.from_coords(d.space, [AlgebraElement.identity(d.space.shape)] * 2)
        y = ModuleVector.from_coords(d.space, [AlgebraElement.zeros(d.space.shape), AlgebraElement.identity(d.space.shape)])
        res.close("difference_norm", vec_norm(x - y), 1.0, 1e-12)
        res.close("sum_norm", vec_norm(x + y), 5 ** 0.5, 1e-12)
    else:
        res.add("all_true", report.all_true)
    return res


def suite_decomposition(opts: SuiteOptions) -> SuiteResult:
    cfg = opts.cfg()
    out = SuiteResult("decomposition", opts.seed, cfg, opts.tol)
    for i, (label, d) in enumerate(decomposition_cases(opts.seed, 11 if opts.cases is None else opts.cases)):
        out.cases.append(_timed(check_decomposition_case, i, label, d, cfg))
    return out


# ---------------------------------------------------------------------------
# bases


def check_basis_case(index: int, rng: np.random.Generator) -> CaseResult:
    shapes = [(1,), (2,), (3,), (1, 2), (1, 1, 2)]
    shape = AlgebraShape(shapes[index % len(shapes)])
    space = ModuleSpace(shape, int(rng.integers(1, 4)))
    res = CaseResult(index, f"blocks={list(shape.blocks)} p={space.rank}")
    basis = orthonormal_basis(space)
    res.add("basis_size", len(basis) == space.o_dim, size=len(basis), o_dim=space.o_dim)
    x = ModuleVector.random(space, rng)
    res.close("reconstruction", vec_norm(reconstruct(basis, x) - x), 0.0, 1e-10)
    if shape.num_blocks == 1:
        k = shape.blocks[0]
        etas = [unit_vector(k, rng) for _ in basis]
        vs = lemma_base_transform(basis, etas)
        worst = max(alg_norm(inner(v, v) - AlgebraElement(shape, [np.outer(e, e.conj())])) for v, e in zip(vs, etas))
        res.close("transformed_inner_products", worst, 0.0, 1e-10)
        res.close("transformed_reconstruction", vec_norm(reconstruct(vs, x) - x), 0.0, 1e-10)
    return res


def suite_basis(opts: SuiteOptions) -> SuiteResult:
    out = SuiteResult("basis", opts.seed, opts.cfg(), opts.tol)
    for i in range(25 if opts.cases is None else opts.cases):
        out.cases.append(_timed(check_basis_case, i, case_rng(opts.seed, 7, i)))
    return out


# ---------------------------------------------------------------------------
# Hilbert-space equality at small n

DIM_GRID = [(2, 2), (2, 3), (3, 2), (3, 3)]


def check_dim_case(index: int, rng: np.random.Generator, cfg: OptimizerConfig, rel_tol: float) -> CaseResult:
    d, n = DIM_GRID[index % len(DIM_GRID)]
    t = ModuleTuple.random(ModuleSpace(AlgebraShape((1,)), d), n, rng)
    res = CaseResult(index, f"d={d} n={n}")
    h = hilbert_multinorm(t, cfg)
    tt = two_two_multinorm(t, cfg, seeds=[h.certificate])
    res.close("hilbert_eq_two_two", h.value, tt.value, rel_tol, relative=True)
    return res


def suite_dim(opts: SuiteOptions) -> SuiteResult:
    cfg = opts.cfg()
    out = SuiteResult("dim-equality", opts.seed, cfg, opts.tol)
    for i in range(25 if opts.cases is None else opts.cases):
        out.cases.append(_timed(check_dim_case, i, case_rng(opts.seed, 8, i), cfg, opts.rel_tol()))
    return out


def search_gap(d: int, n: int, trials: int, seed: int, cfg: OptimizerConfig) -> dict:
    """Random search for tuples in ``C^d`` where the (2,2) multi-norm exceeds the Hilbert one."""
    best = {"gap": -np.inf}
    for i in range(trials):
        rng = case_rng(seed, 9, i)
        t = ModuleTuple.random(ModuleSpace(AlgebraShape((1,)), d), n, rng)
        h = hilbert_multinorm(t, cfg)
        tt = two_two_multinorm(t, cfg, seeds=[h.certificate])
        gap = (tt.value - h.value) / h.value
        if gap > best["gap"]:
            vectors = [[[float(z.real), float(z.imag)] for z in x.blocks[0][:, 0]] for x in t]
            best = {"trial": i, "gap": float(gap), "hilbert": h.value, "two_two": tt.value, "vectors": vectors}
    return {"command": "search-gap", "d": d, "n": n, "trials": trials, "seed": seed, "cfg": cfg.to_dict(), "best": best}


def _timed(fn: Callable[..., CaseResult], *args) -> CaseResult:
    start = time.perf_counter()
    res = fn(*args)
    res.seconds = time.perf_counter() - start
    return res


SUITES: dict[str, Callable[[SuiteOptions], SuiteResult]] = {
    "axioms": suite_axioms,
    "mu-star-identities": suite_mu_star,
    "inequality-chain": suite_chain,
    "commutative-examples": suite_commutative,
    "kh-theorems": suite_kh,
    "decomposition": suite_decomposition,
    "basis": suite_basis,
    "dim-equality": suite_dim,
}
