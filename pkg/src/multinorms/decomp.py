"""Direct-sum decompositions of a free module and the small / orthogonal / hermitian predicates.

A decomposition ``X = X_1 + ... + X_n`` is given by its natural projections, idempotents
``E_i`` in ``M_p(A)`` with ``E_i E_l = 0`` and ``sum E_i = I``.  The predicates are
statistical: they probe structured tuples first (images of basis vectors with phases
``+-1, +-i``), then random samples, and stop at the first violation.  Comparisons against an
optimizer-backed multi-norm are short-circuited with certified bounds whenever possible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .algebra import AlgebraElement, AlgebraShape, ShapeMismatchError, alg_norm
from .module import ModuleSpace, ModuleTuple, ModuleVector, OperatorOnModule, orthonormal_basis, vec_norm
from .norms import (
    ProjectionFamily,
    column_bound,
    family_is_feasible,
    hilbert_multinorm,
    purestate_multinorm,
    star_multinorm,
    transfer_projection_certificate,
    transfer_to_purestate,
    dual_pairing,
)
from .optimize import DEFAULT_CONFIG, OptimizerConfig, haar_unitary

DECOMP_TOL = 1e-9
EXACT_TOL = 1e-7
OPT_REL_TOL = 1e-4
DEFAULT_SAMPLES = 200
PHASES = (1.0, -1.0, 1j, -1j)
MULTINORMS = ("hilbert", "star", "pure-state")


class Decomposition:
    """Natural projections ``E_1, ..., E_n`` of a direct-sum decomposition."""

    __slots__ = ("space", "idempotents")

    def __init__(self, space: ModuleSpace, idempotents: Sequence[OperatorOnModule], tol: float = DECOMP_TOL):
        idempotents = tuple(idempotents)
        if not idempotents:
            raise ValueError("a decomposition needs at least one summand")
        for E in idempotents:
            if E.space != space:
                raise ShapeMismatchError(f"{E.space} vs {space}")
        for j in range(space.shape.num_blocks):
            mats = [E.blocks[j] for E in idempotents]
            if np.linalg.norm(sum(mats) - np.eye(space.block_dim(j)), 2) > tol:
                raise ValueError("idempotents do not sum to the identity")
            for i, a in enumerate(mats):
                if np.linalg.norm(a @ a - a, 2) > tol:
                    raise ValueError(f"E_{i} is not idempotent")
                for l, b in enumerate(mats):
                    if i != l and np.linalg.norm(a @ b, 2) > tol:
                        raise ValueError(f"E_{i} E_{l} != 0")
        self.space = space
        self.idempotents = idempotents

    @property
    def n(self) -> int:
        return len(self.idempotents)

    def conjugated(self, unitary_blocks: Sequence[np.ndarray]) -> "Decomposition":
        return Decomposition(
            self.space,
            [OperatorOnModule(self.space, [u @ b @ u.conj().T for u, b in zip(unitary_blocks, E.blocks)]) for E in self.idempotents],
        )

    def family(self) -> ProjectionFamily | None:
        """The idempotents as a projection family, if they are self-adjoint."""
        if family_is_feasible(self.idempotents, DECOMP_TOL):
            return ProjectionFamily(self.idempotents)
        return None

    def sample_range(self, i: int, rng: np.random.Generator) -> ModuleVector:
        return self.idempotents[i] @ ModuleVector.random(self.space, rng)

    # -- constructors ---------------------------------------------------
    @classmethod
    def coordinate_split(cls, space: ModuleSpace, sizes: Sequence[int]) -> "Decomposition":
        """Consecutive groups of module coordinates; zero sizes give zero summands."""
        if sum(sizes) != space.rank or any(s < 0 for s in sizes):
            raise ValueError(f"sizes {tuple(sizes)} must be nonnegative and sum to {space.rank}")
        out = []
        start = 0
        for s in sizes:
            blocks = []
            for k in space.shape.blocks:
                d = np.zeros(space.rank * k)
                d[start * k:(start + s) * k] = 1.0
                blocks.append(np.diag(d).astype(complex))
            out.append(OperatorOnModule(space, blocks))
            start += s
        return cls(space, out)

    @classmethod
    def haar_rotated(cls, space: ModuleSpace, sizes: Sequence[int], rng: np.random.Generator) -> "Decomposition":
        base = cls.coordinate_split(space, sizes)
        return base.conjugated([haar_unitary(space.block_dim(j), rng) for j in range(space.shape.num_blocks)])

    @classmethod
    def random_orthogonal(cls, space: ModuleSpace, n: int, rng: np.random.Generator) -> "Decomposition":
        """Independent random ranks per block, then a Haar rotation; summands may vanish in some blocks."""
        per_block = []
        for j in range(space.shape.num_blocks):
            m = space.block_dim(j)
            cuts = np.sort(rng.integers(0, m + 1, size=n - 1))
            bounds = np.concatenate([[0], cuts, [m]])
            u = haar_unitary(m, rng)
            mats = []
            for i in range(n):
                d = np.zeros(m)
                d[bounds[i]:bounds[i + 1]] = 1.0
                mats.append(u @ np.diag(d) @ u.conj().T)
            per_block.append(mats)
        return cls(space, [OperatorOnModule(space, [per_block[j][i] for j in range(space.shape.num_blocks)]) for i in range(n)])

    @classmethod
    def skew_pair(cls, shape) -> "Decomposition":
        """``Y_1 = {(a, a)}`` and ``Y_2 = {(0, b)}`` in ``l^2_2(A)``: complementary but not orthogonal."""
        space = ModuleSpace(AlgebraShape(tuple(shape)) if not isinstance(shape, AlgebraShape) else shape, 2)
        one = AlgebraElement.identity(space.shape)
        zero = AlgebraElement.zeros(space.shape)
        e1 = OperatorOnModule.from_entries(space, [[one, zero], [one, zero]])
        e2 = OperatorOnModule.from_entries(space, [[zero, zero], [-one, one]])
        return cls(space, [e1, e2])

    @classmethod
    def from_entries(cls, space: ModuleSpace, matrices: Sequence[Sequence[Sequence[AlgebraElement]]]) -> "Decomposition":
        return cls(space, [OperatorOnModule.from_entries(space, m) for m in matrices])


@dataclass
class PredicateResult:
    verdict: bool
    checks: int = 0
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.verdict


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _probe_tuples(d: Decomposition) -> Iterator[tuple[list[ModuleVector], list[complex]]]:
    """Pairs of basis-vector images ``E_i b, E_l b'`` with a phase on the second slot."""
    basis = orthonormal_basis(d.space)
    images = [[E @ b for b in basis] for E in d.idempotents]
    zero = ModuleVector.zeros(d.space)
    for i, l in itertools.combinations(range(d.n), 2):
        for u in images[i]:
            if vec_norm(u) == 0:
                continue
            for v in images[l]:
                if vec_norm(v) == 0:
                    continue
                xs = [zero] * d.n
                xs[i], xs[l] = u, v
                for a in PHASES[1:]:
                    alphas = [1.0] * d.n
                    alphas[l] = a
                    yield list(xs), alphas


def _random_tuples(d: Decomposition, rng: np.random.Generator, samples: int):
    for _ in range(samples):
        xs = [d.sample_range(i, rng) for i in range(d.n)]
        alphas = [PHASES[int(r)] for r in rng.integers(0, 4, size=d.n)]
        yield xs, alphas


def _sum(space: ModuleSpace, xs: Sequence[ModuleVector]) -> ModuleVector:
    out = ModuleVector.zeros(space)
    for x in xs:
        out = out + x
    return out


def is_mutually_orthogonal(d: Decomposition, tol: float = DECOMP_TOL) -> PredicateResult:
    """``E_i^* E_l = 0`` for all ``i != l``, i.e. the summands are pairwise orthogonal."""
    checks = 0
    for i, l in itertools.permutations(range(d.n), 2):
        checks += 1
        worst = max(np.linalg.norm(a.conj().T @ b, 2) for a, b in zip(d.idempotents[i].blocks, d.idempotents[l].blocks))
        if worst > tol:
            return PredicateResult(False, checks, {"pair": [i, l], "norm": float(worst)})
    return PredicateResult(True, checks)


def is_hermitian(d: Decomposition, seed=0, tol: float = EXACT_TOL, samples: int = DEFAULT_SAMPLES) -> PredicateResult:
    """``||sum alpha_i x_i|| = ||sum x_i||`` for ``x_i`` in the summands and unimodular ``alpha_i``."""
    rng = _rng(seed)
    checks = 0
    for xs, alphas in itertools.chain(_probe_tuples(d), _random_tuples(d, rng, samples)):
        checks += 1
        plain = vec_norm(_sum(d.space, xs))
        phased = vec_norm(_sum(d.space, [x * complex(a) for x, a in zip(xs, alphas)]))
        if abs(plain - phased) > tol * max(1.0, plain):
            return PredicateResult(False, checks, {"alphas": [complex(a) for a in alphas], "plain": plain, "phased": phased})
    return PredicateResult(True, checks)


def _light(cfg: OptimizerConfig) -> OptimizerConfig:
    return cfg.with_(restarts=min(cfg.restarts, 4), max_iters=min(cfg.max_iters, 100))


def _cheap_lower(name: str, t: ModuleTuple, family: ProjectionFamily | None) -> float:
    """Certified lower bound from the single-slot floor and, if available, the injected family."""
    best = max(vec_norm(x) for x in t)
    if family is None:
        return best
    if name == "hilbert":
        return max(best, family.evaluate(t))
    if name == "pure-state":
        return max(best, transfer_to_purestate(family, t)[1])
    eps = 1e-12 * max(1.0, column_bound(t) ** 2)
    y = transfer_projection_certificate(family, t, eps)
    return max(best, float(np.sqrt(alg_norm(dual_pairing(y, t)))))


def _optimized(name: str, t: ModuleTuple, cfg: OptimizerConfig, seeds) -> float:
    if name == "hilbert":
        return hilbert_multinorm(t, cfg, seeds).value
    if name == "star":
        return star_multinorm(t, cfg, seeds).value
    return purestate_multinorm(t, cfg, seeds).value


def _check_name(name: str) -> None:
    if name not in MULTINORMS:
        raise ValueError(f"multinorm must be one of {MULTINORMS}, got {name!r}")


def is_small(
    d: Decomposition,
    multinorm: str = "hilbert",
    seed=0,
    tol: float = OPT_REL_TOL,
    samples: int = DEFAULT_SAMPLES,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
) -> PredicateResult:
    """``||sum E_i x_i|| <= ||(x_1, ..., x_n)||_n`` with the decomposition's own family as a candidate."""
    _check_name(multinorm)
    rng = _rng(seed)
    family = d.family()
    checks = 0

    def arbitrary():
        for _ in range(samples):
            yield [ModuleVector.random(d.space, rng) for _ in range(d.n)], None

    probes = ((list(xs), None) for xs, _ in _probe_tuples(d))
    phased = (([x * complex(a) for x, a in zip(xs, al)], None) for xs, al in _probe_tuples(d))
    for xs, _ in itertools.chain(probes, phased, arbitrary()):
        checks += 1
        t = ModuleTuple(xs, d.space)
        lhs = vec_norm(_sum(d.space, [E @ x for E, x in zip(d.idempotents, xs)]))
        slack = tol * max(1.0, lhs)
        if _cheap_lower(multinorm, t, family) >= lhs - slack:
            continue
        if lhs > column_bound(t) + slack:
            return PredicateResult(False, checks, {"lhs": lhs, "upper_bound": column_bound(t)})
        rhs = _optimized(multinorm, t, _light(cfg), [family] if family else [])
        if lhs > rhs + slack:
            return PredicateResult(False, checks, {"lhs": lhs, "multinorm": rhs})
    return PredicateResult(True, checks)


def _random_partition(n: int, rng: np.random.Generator) -> list[list[int]]:
    labels = rng.integers(0, n, size=n)
    classes = [list(np.flatnonzero(labels == c)) for c in range(n)]
    return [[int(i) for i in c] for c in classes if c]


def _norm_bounds(name: str, t: ModuleTuple, family, cfg: OptimizerConfig, seeds) -> tuple[float, float]:
    lo = _cheap_lower(name, t, family)
    hi = column_bound(t)
    if hi - lo <= EXACT_TOL * max(1.0, hi):
        return lo, hi
    val = _optimized(name, t, cfg, seeds)
    return val, hi


def is_orthogonal_decomp(
    d: Decomposition,
    multinorm: str = "hilbert",
    seed=0,
    tol: float = OPT_REL_TOL,
    samples: int = DEFAULT_SAMPLES,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
) -> PredicateResult:
    """Merging slots along any partition leaves the multi-norm unchanged, for ``x_i`` in the summands."""
    _check_name(multinorm)
    rng = _rng(seed)
    family = d.family()
    light = _light(cfg)
    checks = 0

    def cases():
        for xs, alphas in _probe_tuples(d):
            yield [x * complex(a) for x, a in zip(xs, alphas)], [list(range(d.n))]
        for xs, _ in _random_tuples(d, rng, samples):
            yield xs, [list(range(d.n))] if rng.random() < 0.25 else _random_partition(d.n, rng)

    for xs, part in cases():
        checks += 1
        full = ModuleTuple(xs, d.space)
        merged = ModuleTuple([_sum(d.space, [xs[i] for i in cls]) for cls in part], d.space)
        merged_family = None
        if family is not None:
            merged_family = ProjectionFamily(
                tuple(_sum_ops(d.space, [d.idempotents[i] for i in cls]) for cls in part)
            )
        lo_m, hi_m = _norm_bounds(multinorm, merged, merged_family, light, [merged_family] if merged_family else [])
        seeds_full = [family] if family else []
        lo_f, hi_f = _norm_bounds(multinorm, full, family, light, seeds_full)
        slack = tol * max(1.0, hi_m, hi_f)
        # a definite gap: one side's certified value exceeds the other's upper bound
        if lo_m > hi_f + slack or lo_f > hi_m + slack or abs(lo_m - lo_f) > slack:
            return PredicateResult(
                False, checks, {"partition": part, "merged": lo_m, "full": lo_f, "merged_upper": hi_m, "full_upper": hi_f}
            )
    return PredicateResult(True, checks)


def _sum_ops(space: ModuleSpace, ops: Sequence[OperatorOnModule]) -> OperatorOnModule:
    out = OperatorOnModule.zeros(space)
    for op in ops:
        out = out + op
    return out


STATEMENTS = (
    "mutually_orthogonal",
    "small_hilbert",
    "small_star",
    "small_pure_state",
    "orthogonal_hilbert",
    "orthogonal_star",
    "orthogonal_pure_state",
    "hermitian",
)


@dataclass
class EquivalenceReport:
    verdicts: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return len(set(self.verdicts.values())) == 1

    @property
    def all_true(self) -> bool:
        return all(self.verdicts.values())

    @property
    def all_false(self) -> bool:
        return not any(self.verdicts.values())

    def to_dict(self) -> dict:
        return {"verdicts": dict(self.verdicts), "consistent": self.consistent, "witnesses": dict(self.witnesses)}


def equivalence_suite(
    d: Decomposition, cfg: OptimizerConfig = DEFAULT_CONFIG, samples: int = DEFAULT_SAMPLES
) -> EquivalenceReport:
    """Evaluate the eight equivalent statements; they must all agree."""
    results = {"mutually_orthogonal": is_mutually_orthogonal(d)}
    for name in MULTINORMS:
        key = name.replace("-", "_")
        results[f"small_{key}"] = is_small(d, name, seed=cfg.seed, samples=samples, cfg=cfg)
        results[f"orthogonal_{key}"] = is_orthogonal_decomp(d, name, seed=cfg.seed, samples=samples, cfg=cfg)
    results["hermitian"] = is_hermitian(d, seed=cfg.seed, samples=samples)
    report = EquivalenceReport()
    for key in STATEMENTS:
        report.verdicts[key] = results[key].verdict
        if results[key].witness is not None:
            report.witnesses[key] = results[key].witness
    return report
