"""Multi-norms on free Hilbert modules.

Every block ``j`` of the algebra contributes independently: inner products,
operator norms and projection families all split over blocks, and the C*-norm
is the blockwise maximum.  The per-block problems are

* ``mu_star``: the largest singular value of ``[Y_1 | ... | Y_n]``;
* Hilbert multi-norm: ``max ||sum P_i X_i||`` over orthogonal projection
  families in ``M_{p k_j}``, i.e. ``max_{zeta, frame} sum_i |y_i^* X_i zeta|^2``
  over unit ``zeta`` and orthonormal frames ``(y_i)_{i in S}``;
* the ``*`` multi-norm: the same objective over contractions
  ``[Y_1 | ... | Y_n]``;
* the pure-state multi-norm: the Hilbert multi-norm of ``(X_i xi)`` maximized
  over unit ``xi``.

The objectives are convex in the frame, so replacing the frame by the polar
factor of the objective's gradient never decreases them.  That step, with
restarts and seeded candidates, drives all optimizer-backed estimates.  The
returned values are certified lower bounds: each comes with a feasible witness
that re-evaluates to the value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .algebra import AlgebraElement, PureState, alg_norm, functional_calculus
from .localization import localize
from .module import (
    ModuleSpace,
    ModuleTuple,
    ModuleVector,
    OperatorOnModule,
    inner,
    sample_D_n,
    theta,
    vec_norm,
)
from .optimize import (
    DEFAULT_CONFIG,
    OptimizerConfig,
    count_rank_assignments,
    haar_unitary,
    polar,
    rank_assignments,
    restart_rngs,
)

EXACT = "exact"
LOWER = "lower_bound_certified"

COMPOSITION_CAP = 4000
SUBSET_CAP = 64


class InfeasibleFamilyError(ValueError):
    pass


class UnsupportedShapeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# certificates


def _cplx(a: np.ndarray) -> list:
    a = np.asarray(a, complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


@dataclass(frozen=True, eq=False)
class SpectralWitness:
    """Unit vector in ``C^{p k_j}`` attaining the top eigenvalue of ``sum theta(y_i, y_i)``."""

    block: int
    vector: np.ndarray

    def evaluate(self, t: ModuleTuple) -> float:
        total = sum((theta(y, y) for y in t), OperatorOnModule.zeros(t.space))
        v = self.vector
        return float(np.sqrt(max(np.vdot(v, total.blocks[self.block] @ v).real, 0.0)))

    def is_feasible(self, tol: float = 1e-8) -> bool:
        return abs(np.linalg.norm(self.vector) - 1.0) <= tol

    def to_dict(self) -> dict:
        return {"type": "spectral", "block": self.block, "vector": _cplx(self.vector)}


@dataclass(frozen=True, eq=False)
class SlotWitness:
    index: int

    def evaluate(self, t: ModuleTuple) -> float:
        return vec_norm(t[self.index])

    def is_feasible(self, tol: float = 1e-8) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"type": "slot", "index": self.index}


@dataclass(frozen=True, eq=False)
class ProjectionFamily:
    """Mutually orthogonal projections ``(P_i)`` in ``L(X)`` summing to the identity."""

    projections: tuple[OperatorOnModule, ...]

    @property
    def space(self) -> ModuleSpace:
        return self.projections[0].space

    def apply(self, t: ModuleTuple) -> ModuleVector:
        if len(t) != len(self.projections):
            raise ValueError("family and tuple have different lengths")
        out = ModuleVector.zeros(t.space)
        for P, x in zip(self.projections, t):
            out = out + P @ x
        return out

    def evaluate(self, t: ModuleTuple) -> float:
        return vec_norm(self.apply(t))

    def is_feasible(self, tol: float = 1e-8) -> bool:
        return family_is_feasible(self.projections, tol)

    def permuted(self, perm: Sequence[int]) -> "ProjectionFamily":
        return ProjectionFamily(tuple(self.projections[i] for i in perm))

    def to_dict(self) -> dict:
        return {
            "type": "projection_family",
            "projections": [[_cplx(b) for b in P.blocks] for P in self.projections],
        }


@dataclass(frozen=True, eq=False)
class DualTuple:
    """Tuple ``(y_i)`` with ``mu_star(y) <= 1``."""

    y: ModuleTuple

    def evaluate(self, t: ModuleTuple) -> float:
        return float(np.sqrt(alg_norm(dual_pairing(self.y, t))))

    def is_feasible(self, tol: float = 1e-8) -> bool:
        return mu_star(self.y).value <= 1.0 + tol

    def to_dict(self) -> dict:
        return {"type": "dual_tuple", "y": [[_cplx(b) for b in v.blocks] for v in self.y]}


@dataclass(frozen=True, eq=False)
class LocalizedFamily:
    """Pure state together with a projection family on its localization."""

    state: PureState
    projections: tuple[np.ndarray, ...]

    def evaluate(self, t: ModuleTuple) -> float:
        loc = localize(t.space, self.state)
        total = sum(P @ loc.q(x) for P, x in zip(self.projections, t))
        return float(np.linalg.norm(total))

    def is_feasible(self, tol: float = 1e-8) -> bool:
        return _matrix_family_feasible(self.projections, tol)

    def to_dict(self) -> dict:
        return {
            "type": "localized_family",
            "block": self.state.block,
            "xi": _cplx(self.state.vector),
            "projections": [_cplx(P) for P in self.projections],
        }


@dataclass
class NormEstimate:
    value: float
    kind: str
    certificate: object
    method: str
    effort: dict = field(default_factory=dict)
    tol: float = 0.0
    lower: float = 0.0
    upper: float = float("inf")

    def summary(self) -> dict:
        return {
            "method": self.method,
            "value": self.value,
            "kind": self.kind,
            "lower_bound": self.lower,
            "upper_bound": self.upper,
            "tol": self.tol,
            "effort": dict(self.effort),
            "certificate": self.certificate.to_dict() if self.certificate is not None else None,
        }


# ---------------------------------------------------------------------------
# helpers


def _matrix_family_feasible(Ps: Sequence[np.ndarray], tol: float) -> bool:
    if not len(Ps):
        return False
    m = Ps[0].shape[0]
    total = np.zeros((m, m), complex)
    for i, P in enumerate(Ps):
        if np.linalg.norm(P @ P - P, 2) > tol or np.linalg.norm(P - P.conj().T, 2) > tol:
            return False
        for Q in Ps[i + 1:]:
            if np.linalg.norm(P @ Q, 2) > tol:
                return False
        total = total + P
    return np.linalg.norm(total - np.eye(m), 2) <= tol


def family_is_feasible(projections: Sequence[OperatorOnModule], tol: float = 1e-9) -> bool:
    if not projections:
        return False
    nb = projections[0].space.shape.num_blocks
    return all(_matrix_family_feasible([P.blocks[j] for P in projections], tol) for j in range(nb))


def _as_family(family) -> ProjectionFamily:
    if isinstance(family, ProjectionFamily):
        return family
    return ProjectionFamily(tuple(family))


def dual_pairing(y: ModuleTuple, t: ModuleTuple) -> AlgebraElement:
    """``sum_i |<y_i, x_i>|^2 = sum_i <x_i, y_i><y_i, x_i>``."""
    if len(y) != len(t):
        raise ValueError("tuples of different length")
    total = AlgebraElement.zeros(t.space.shape)
    for yi, xi in zip(y, t):
        c = inner(yi, xi)
        total = total + c.adjoint() * c
    return total


def sandwich_bounds(t: ModuleTuple) -> tuple[float, float]:
    """``max ||x_i||`` and ``(sum ||x_i||^2)^{1/2}``: bounds for the Hilbert and ``*`` multi-norms."""
    norms = [vec_norm(x) for x in t]
    return max(norms, default=0.0), float(np.sqrt(sum(v * v for v in norms)))


def column_bound(t: ModuleTuple) -> float:
    """``||sum_i |x_i|^2||^{1/2}``, an upper bound for the Hilbert, ``*`` and pure-state multi-norms.

    Each of them is a sup of quantities dominated by ``sum |x_i|^2``: ``|P x|^2 <= |x|^2``
    for projections and ``|<y, x>|^2 <= ||y||^2 |x|^2`` by Cauchy-Schwarz.
    """
    total = AlgebraElement.zeros(t.space.shape)
    for x in t:
        total = total + inner(x, x)
    return float(np.sqrt(alg_norm(total)))


def _top_eig(m: np.ndarray) -> tuple[float, np.ndarray]:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return float(w[-1]), v[:, -1]


def _family_from_blocks(space: ModuleSpace, per_block: Sequence[Sequence[np.ndarray]]) -> ProjectionFamily:
    n = len(per_block[0])
    return ProjectionFamily(
        tuple(OperatorOnModule(space, [per_block[j][i] for j in range(len(per_block))]) for i in range(n))
    )


def _is_zero(t: ModuleTuple) -> bool:
    return all(not np.any(b) for x in t for b in x.blocks)


def _check_nonempty(t: ModuleTuple) -> None:
    if len(t) == 0:
        raise ValueError("empty tuple")


# ---------------------------------------------------------------------------
# exact norms


def mu_star(t: ModuleTuple) -> NormEstimate:
    """Module weak 2-summing norm, ``||sum_i theta(y_i, y_i)||^{1/2}``."""
    _check_nonempty(t)
    total = sum((theta(y, y) for y in t), OperatorOnModule.zeros(t.space))
    best, witness = -1.0, None
    for j, b in enumerate(total.blocks):
        lam, v = _top_eig(b)
        if lam > best:
            best, witness = lam, SpectralWitness(j, v)
    value = float(np.sqrt(max(best, 0.0)))
    lo = max(vec_norm(x) for x in t)
    hi = sum(vec_norm(x) for x in t)
    return NormEstimate(value, EXACT, witness, "mu-star", {"eigensolves": len(total.blocks)}, 0.0, lo, hi)


def weak_two_summing(t: ModuleTuple) -> float:
    _require_scalar(t)
    return mu_star(t).value


def min_multinorm(t: ModuleTuple) -> NormEstimate:
    _check_nonempty(t)
    norms = [vec_norm(x) for x in t]
    i = int(np.argmax(norms))
    return NormEstimate(norms[i], EXACT, SlotWitness(i), "min", {}, 0.0, norms[i], norms[i])


def mu_star_sampled(
    t: ModuleTuple, samples: int, rng: np.random.Generator, polish: bool = False, polish_iters: int = 20000
) -> float:
    """Sampling oracle for ``mu_star``: the larger of the two forms below."""
    return max(mu_star_sampled_forms(t, samples, rng, polish, polish_iters))


def mu_star_sampled_forms(
    t: ModuleTuple, samples: int, rng: np.random.Generator, polish: bool = False, polish_iters: int = 20000
) -> tuple[float, float]:
    """Sampled lower bounds for ``mu_star`` from both sup characterizations.

    Form 1 samples unit vectors ``x`` and evaluates ``||sum |<y_i, x>|^2||^{1/2}``;
    form 2 samples ``(a_i)`` with ``||sum a_i^* a_i|| = 1`` and evaluates
    ``||sum y_i a_i||``.  Never uses an eigendecomposition of
    ``sum theta(y_i, y_i)``; ``polish`` refines the best form-1 sample by
    power iteration on the row map and feeds it to form 2.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    space = t.space
    shape = space.shape
    ys = [t.block_stack(j) for j in range(shape.num_blocks)]  # (n, N, k)
    best1, best_x = 0.0, None
    for _ in range(samples):
        x = ModuleVector.random(space, rng)
        nx = vec_norm(x)
        val = 0.0
        for j, Y in enumerate(ys):
            c = np.einsum("nab,ac->nbc", Y.conj(), x.blocks[j]) / nx  # <y_i, x>
            m = np.einsum("nba,nbc->ac", c.conj(), c)
            val = max(val, float(np.linalg.norm(m, 2)))
        if val >= best1:
            best1, best_x = val, x * (1.0 / nx)
    best2 = 0.0
    for _ in range(samples):
        a = [AlgebraElement.random(shape, rng) for _ in t]
        s = sum((ai.adjoint() * ai for ai in a), AlgebraElement.zeros(shape))
        scale = 1.0 / np.sqrt(alg_norm(s))
        z = sum((y * ai for y, ai in zip(t, a)), ModuleVector.zeros(space))
        best2 = max(best2, vec_norm(z) * scale)
    if polish and best_x is not None:
        x = _power_polish(t, best_x, polish_iters)
        row = [inner(y, x) for y in t]
        s = sum((c.adjoint() * c for c in row), AlgebraElement.zeros(shape))
        best1 = max(best1, alg_norm(s))
        if alg_norm(s) > 0:
            z = sum((y * c for y, c in zip(t, row)), ModuleVector.zeros(space))
            best2 = max(best2, vec_norm(z) / np.sqrt(alg_norm(s)))
    return float(np.sqrt(best1)), float(best2)


def _power_polish(t: ModuleTuple, x: ModuleVector, iters: int) -> ModuleVector:
    """Push a unit vector towards the top of ``z -> sum y_i <y_i, z>`` by power iteration."""
    space = t.space
    best, best_block, best_vec = -1.0, 0, None
    for j in range(space.shape.num_blocks):
        Y = t.block_stack(j)
        X = x.blocks[j]
        m = np.einsum("nab,ac->nbc", Y.conj(), X)
        gram = np.einsum("nba,nbc->ac", m.conj(), m)
        lam, zeta = _top_eig(gram)
        if lam > best:
            best, best_block, best_vec = lam, j, X @ zeta
    Y = t.block_stack(best_block)
    v = best_vec / max(np.linalg.norm(best_vec), 1e-300)
    prev = -1.0
    for _ in range(iters):
        w = np.einsum("nab,nb->a", Y, np.einsum("nba,b->na", Y.conj(), v))
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        v = w / nw
        if abs(nw - prev) <= 1e-15 * nw:
            break
        prev = nw
    blocks = [np.zeros_like(b) for b in x.blocks]
    e = np.zeros(space.shape.blocks[best_block], complex)
    e[0] = 1.0
    blocks[best_block] = np.outer(v, e)
    return ModuleVector(space, blocks)


# ---------------------------------------------------------------------------
# per-block engines


def _value_sq(Xs: np.ndarray, Ps: Sequence[np.ndarray]) -> float:
    m = sum(X.conj().T @ P @ X for X, P in zip(Xs, Ps))
    return _top_eig(m)[0]


def _single_slot_family(n: int, N: int, i: int) -> list[np.ndarray]:
    fam = [np.zeros((N, N), complex) for _ in range(n)]
    fam[i] = np.eye(N, dtype=complex)
    return fam


def _composition_candidates(Xs: np.ndarray) -> tuple[float, list[np.ndarray]] | None:
    """Best family of coordinate projections over all rank assignments."""
    n, N, k = Xs.shape
    if count_rank_assignments(N, n) > COMPOSITION_CAP:
        return None
    comps = np.array(list(rank_assignments(N, n)))
    # prefix Gram matrices G[i, r] = X_i[:r]^* X_i[:r]
    outer = np.einsum("nra,nrb->nrab", Xs.conj(), Xs)
    pref = np.concatenate([np.zeros((n, 1, k, k), complex), np.cumsum(outer, axis=1)], axis=1)
    ends = np.cumsum(comps, axis=1)
    starts = ends - comps
    idx = np.arange(n)
    ms = pref[idx, ends] - pref[idx, starts]  # (C, n, k, k)
    ms = ms.sum(axis=1)
    vals = np.linalg.eigvalsh((ms + np.conj(np.swapaxes(ms, -1, -2))) / 2)[:, -1]
    c = int(np.argmax(vals))
    fam = []
    for i in range(n):
        d = np.zeros(N)
        d[starts[c, i]:ends[c, i]] = 1.0
        fam.append(np.diag(d).astype(complex))
    return float(vals[c]), fam


def _frame_ascent(Xs: np.ndarray, Y: np.ndarray, iters: int, tol: float) -> tuple[float, np.ndarray, int]:
    """Maximize ``lambda_max(sum X_i^* y_i y_i^* X_i)`` over orthonormal frames ``Y``."""
    f_prev = -np.inf
    it = 0
    for it in range(1, iters + 1):
        c = np.einsum("an,nak->nk", Y.conj(), Xs)  # rows y_i^* X_i
        f, zeta = _top_eig(c.conj().T @ c)
        if f - f_prev <= tol * max(1.0, abs(f)):
            break
        f_prev = f
        w = Xs @ zeta  # (n, N)
        g = w.T * np.conj(c @ zeta)[None, :]
        Y = polar(g)
    c = np.einsum("an,nak->nk", Y.conj(), Xs)
    f = _top_eig(c.conj().T @ c)[0]
    return f, Y, it


def _family_from_frame(Xs: np.ndarray, Y: np.ndarray, S: Sequence[int]) -> tuple[float, list[np.ndarray]]:
    n, N, _ = Xs.shape
    fam = [np.zeros((N, N), complex) for _ in range(n)]
    for col, i in enumerate(S):
        fam[i] = np.outer(Y[:, col], Y[:, col].conj())
    rest = np.eye(N) - Y @ Y.conj().T
    rest = (rest + rest.conj().T) / 2
    best, best_i = -1.0, S[0]
    if np.linalg.norm(rest) > 1e-12:
        for i in S:
            fam[i] = fam[i] + rest
            v = _value_sq(Xs, fam)
            fam[i] = fam[i] - rest
            if v > best:
                best, best_i = v, i
        fam[best_i] = fam[best_i] + rest
    return _value_sq(Xs, fam), fam


def _frame_from_family(Xs: np.ndarray, fam: Sequence[np.ndarray], S: Sequence[int]) -> np.ndarray:
    m = sum(X.conj().T @ P @ X for X, P in zip(Xs, fam))
    _, zeta = _top_eig(m)
    g = np.stack([fam[i] @ Xs[i] @ zeta for i in S], axis=1)
    return polar(g)


def hilbert_block(
    Xs: np.ndarray,
    cfg: OptimizerConfig,
    rngs: Sequence[np.random.Generator],
    seeds: Iterable[Sequence[np.ndarray]] = (),
) -> tuple[float, list[np.ndarray], dict]:
    """Squared Hilbert multi-norm of one block: ``max ||sum P_i X_i||^2``.

    ``Xs`` has shape ``(n, N, k)``.  Returns the value, the best family of
    ``N x N`` projections and effort counters.
    """
    n, N, k = Xs.shape
    norms = np.array([np.linalg.norm(X, 2) for X in Xs])
    i0 = int(np.argmax(norms))
    best_val, best_fam = float(norms[i0] ** 2), _single_slot_family(n, N, i0)
    effort = {"candidates": 1, "ascent_iterations": 0, "restarts": 0}
    if n == 1 or best_val == 0.0:
        return best_val, best_fam, effort

    starts: list[list[np.ndarray]] = [best_fam]
    comp = _composition_candidates(Xs)
    if comp is not None:
        effort["candidates"] += count_rank_assignments(N, n)
        starts.append(comp[1])
        if comp[0] > best_val:
            best_val, best_fam = comp
    for fam in seeds:
        fam = [np.asarray(P, complex) for P in fam]
        v = _value_sq(Xs, fam)
        effort["candidates"] += 1
        starts.append(fam)
        if v > best_val:
            best_val, best_fam = v, fam

    m = min(n, N)
    subsets = list(itertools.combinations(range(n), m))
    if len(subsets) > SUBSET_CAP:
        order = np.argsort(-norms, kind="stable")
        subsets = [tuple(sorted(order[:m]))] + [
            tuple(sorted(rngs[0].choice(n, m, replace=False))) for _ in range(SUBSET_CAP - 1)
        ]
    per_subset = max(1, len(rngs) // len(subsets)) if len(subsets) > 1 else len(rngs)
    for s_idx, S in enumerate(subsets):
        frames = [_frame_from_family(Xs, fam, S) for fam in starts]
        for r in range(per_subset):
            rng = rngs[(s_idx * per_subset + r) % len(rngs)]
            frames.append(haar_unitary(N, rng)[:, :m])
        Xs_S = Xs[list(S)]
        for Y in frames:
            _, Y, its = _frame_ascent(Xs_S, Y, cfg.max_iters, cfg.obj_tol)
            effort["ascent_iterations"] += its
            effort["restarts"] += 1
            v, fam = _family_from_frame(Xs, Y, S)
            if v > best_val:
                best_val, best_fam = v, fam
    return best_val, best_fam, effort


def _contraction_ascent(Xs: np.ndarray, W: np.ndarray, iters: int, tol: float) -> tuple[float, np.ndarray, int]:
    """Maximize ``lambda_max(sum X_i^* Y_i Y_i^* X_i)`` over contractions ``W = [Y_1|...|Y_n]``."""
    n, N, k = Xs.shape
    f_prev = -np.inf
    it = 0
    for it in range(1, iters + 1):
        Ys = W.reshape(N, n, k).transpose(1, 0, 2)
        B = np.einsum("nab,nac->nbc", Ys.conj(), Xs)  # Y_i^* X_i
        f, zeta = _top_eig(np.einsum("nba,nbc->ac", B.conj(), B))
        if f - f_prev <= tol * max(1.0, abs(f)):
            break
        f_prev = f
        w = Xs @ zeta  # (n, N)
        bz = B @ zeta  # (n, k)
        g = np.einsum("na,nb->anb", w, bz.conj()).reshape(N, n * k)
        W = polar(g)
    Ys = W.reshape(N, n, k).transpose(1, 0, 2)
    B = np.einsum("nab,nac->nbc", Ys.conj(), Xs)
    f = _top_eig(np.einsum("nba,nbc->ac", B.conj(), B))[0]
    return f, W, it


def star_block(
    Xs: np.ndarray,
    cfg: OptimizerConfig,
    rngs: Sequence[np.random.Generator],
    seeds: Iterable[np.ndarray] = (),
) -> tuple[float, np.ndarray, dict]:
    """Squared ``*`` multi-norm of one block; returns ``(value, Ys, effort)`` with ``Ys`` of shape ``(n, N, k)``."""
    n, N, k = Xs.shape
    effort = {"restarts": 0, "ascent_iterations": 0}
    if not np.any(Xs):
        return 0.0, np.zeros_like(Xs), effort
    starts = []
    for Ys in seeds:
        W = np.asarray(Ys, complex).transpose(1, 0, 2).reshape(N, n * k)
        nrm = np.linalg.norm(W, 2)
        if nrm > 0:
            starts.append(W / max(nrm, 1.0))
    starts.append(polar(Xs.transpose(1, 0, 2).reshape(N, n * k)))
    starts.append(np.eye(N, n * k, dtype=complex))
    for rng in rngs:
        g = rng.standard_normal((N, n * k)) + 1j * rng.standard_normal((N, n * k))
        starts.append(polar(g))
    best_val, best_W = -1.0, None
    for W in starts:
        v0 = _contraction_value(Xs, W)
        v, W2, its = _contraction_ascent(Xs, W, cfg.max_iters, cfg.obj_tol)
        effort["restarts"] += 1
        effort["ascent_iterations"] += its
        if v0 > v:  # seeds are kept as-is when the step does not help
            v, W2 = v0, W
        if v > best_val:
            best_val, best_W = v, W2
    return best_val, best_W.reshape(N, n, k).transpose(1, 0, 2), effort


def _contraction_value(Xs: np.ndarray, W: np.ndarray) -> float:
    n, N, k = Xs.shape
    Ys = W.reshape(N, n, k).transpose(1, 0, 2)
    B = np.einsum("nab,nac->nbc", Ys.conj(), Xs)
    return _top_eig(np.einsum("nba,nbc->ac", B.conj(), B))[0]


# ---------------------------------------------------------------------------
# optimizer-backed multi-norms


def _exact_single(t: ModuleTuple, method: str, certificate) -> NormEstimate:
    v = vec_norm(t[0])
    return NormEstimate(v, EXACT, certificate, method, {}, 0.0, v, v)


def _theta_families(t: ModuleTuple, cfg: OptimizerConfig, count: int) -> list[ProjectionFamily]:
    """Families ``P_i = theta(v_i, v_i)`` (last one the complement) from random orthogonal tuples."""
    n, space = len(t), t.space
    if n > space.rank:
        return []
    out = []
    for rng in restart_rngs(cfg.seed, count, salt=77):
        v = sample_D_n(space, n, rng).tuple
        Ps = [theta(v[i], v[i]) for i in range(n - 1)]
        rest = OperatorOnModule.identity(space)
        for P in Ps:
            rest = rest - P
        out.append(ProjectionFamily(tuple(Ps) + (rest,)))
    return out


def _lift_localized(space: ModuleSpace, lf: LocalizedFamily, n: int) -> list[list[np.ndarray]]:
    j = lf.state.block
    per_block = []
    for b in range(space.shape.num_blocks):
        if b == j:
            per_block.append([np.asarray(P, complex) for P in lf.projections])
        else:
            per_block.append(_single_slot_family(n, space.block_dim(b), 0))
    return per_block


def hilbert_multinorm(
    t: ModuleTuple, cfg: OptimizerConfig | None = None, seeds: Sequence = ()
) -> NormEstimate:
    """Hilbert C*-multi-norm ``sup ||sum P_i x_i||``.

    ``seeds`` may hold :class:`ProjectionFamily` or :class:`LocalizedFamily`
    witnesses; they join the candidate set.
    """
    cfg = cfg or DEFAULT_CONFIG
    _check_nonempty(t)
    n, space = len(t), t.space
    lo, hi = sandwich_bounds(t)
    if n == 1:
        return _exact_single(t, "hilbert", ProjectionFamily((OperatorOnModule.identity(space),)))
    block_seeds: list[list[list[np.ndarray]]] = [[] for _ in space.shape.blocks]
    fams = [s for s in seeds if isinstance(s, ProjectionFamily)]
    fams += _theta_families(t, cfg, min(cfg.restarts, 8))
    for fam in fams:
        for j in range(space.shape.num_blocks):
            block_seeds[j].append([P.blocks[j] for P in fam.projections])
    for s in seeds:
        if isinstance(s, LocalizedFamily):
            lifted = _lift_localized(space, s, n)
            for j in range(space.shape.num_blocks):
                block_seeds[j].append(lifted[j])
    per_block, effort = [], {"candidates": 0, "ascent_iterations": 0, "restarts": 0}
    for j in range(space.shape.num_blocks):
        rngs = restart_rngs(cfg.seed, cfg.restarts, salt=10 + j)
        _, fam, eff = hilbert_block(t.block_stack(j), cfg, rngs, block_seeds[j])
        per_block.append(fam)
        for key in effort:
            effort[key] += eff[key]
    family = _family_from_blocks(space, per_block)
    value = family.evaluate(t)
    return NormEstimate(value, LOWER, family, "hilbert", effort, cfg.obj_tol, lo, hi)


def star_multinorm(
    t: ModuleTuple, cfg: OptimizerConfig | None = None, seeds: Sequence = ()
) -> NormEstimate:
    """The ``*`` multi-norm ``sup{ ||sum |<y_i, x_i>|^2||^{1/2} : mu_star(y) <= 1 }``.

    ``seeds`` may hold :class:`DualTuple` witnesses, bare :class:`ModuleTuple`
    values (rescaled to ``mu_star = 1``) or :class:`ProjectionFamily`
    witnesses, which are turned into dual tuples first.
    """
    cfg = cfg or DEFAULT_CONFIG
    _check_nonempty(t)
    n, space = len(t), t.space
    lo, hi = sandwich_bounds(t)
    if n == 1:
        x = t[0]
        nx = vec_norm(x)
        y = x * (1.0 / nx) if nx > 0 else x
        return _exact_single(t, "star", DualTuple(ModuleTuple([y], space)))
    # small enough that the transferred seed loses far less than the comparison tolerances
    eps = 1e-12 * max(1.0, hi**2)
    duals: list[ModuleTuple] = []
    fams = [s for s in seeds if isinstance(s, ProjectionFamily)]
    # cheap coordinate families, transferred
    cheap = []
    for j in range(space.shape.num_blocks):
        Xs = t.block_stack(j)
        comp = _composition_candidates(Xs)
        cheap.append(comp[1] if comp is not None else _single_slot_family(n, space.block_dim(j), 0))
    fams.append(_family_from_blocks(space, cheap))
    for fam in fams:
        duals.append(transfer_projection_certificate(fam, t, eps))
    for s in seeds:
        if isinstance(s, DualTuple):
            duals.append(s.y)
        elif isinstance(s, ModuleTuple):
            duals.append(s)
    if n <= space.rank:
        for rng in restart_rngs(cfg.seed, min(cfg.restarts, 4), salt=55):
            duals.append(sample_D_n(space, n, rng).tuple)
    scaled = []
    for y in duals:
        m = mu_star(y).value
        if m > 0:
            scaled.append(y.right_act([AlgebraElement.identity(space.shape) * (1.0 / m)] * n))
    per_block, effort = [], {"ascent_iterations": 0, "restarts": 0}
    for j in range(space.shape.num_blocks):
        rngs = restart_rngs(cfg.seed, cfg.restarts, salt=20 + j)
        _, Ys, eff = star_block(t.block_stack(j), cfg, rngs, [y.block_stack(j) for y in scaled])
        per_block.append(Ys)
        for key in effort:
            effort[key] += eff[key]
    y = ModuleTuple(
        [ModuleVector(space, [per_block[j][i] for j in range(space.shape.num_blocks)]) for i in range(n)],
        space,
    )
    m = mu_star(y).value
    if m > 1.0:
        y = y.right_act([AlgebraElement.identity(space.shape) * (1.0 / m)] * n)
    cert = DualTuple(y)
    value = cert.evaluate(t)
    return NormEstimate(value, LOWER, cert, "star", effort, cfg.obj_tol, lo, hi)


def purestate_multinorm(
    t: ModuleTuple, cfg: OptimizerConfig | None = None, seeds: Sequence = ()
) -> NormEstimate:
    """Pure-state multi-norm: sup over pure states of the localized Hilbert multi-norm.

    Commutative algebras are handled exactly in the state variable (finite
    character set).  Otherwise each block searches unit vectors ``xi``:
    starting points are basis vectors, random vectors and transferred witnesses;
    each is refined by alternating an inner Hilbert-space solve with the
    optimal ``xi`` for the current family (a top eigenvector).
    """
    cfg = cfg or DEFAULT_CONFIG
    _check_nonempty(t)
    n, space = len(t), t.space
    shape = space.shape
    lo, hi = sandwich_bounds(t)
    if n == 1:
        best = None
        for j in range(shape.num_blocks):
            lam, xi = _top_eig(inner(t[0], t[0]).data[j])
            if best is None or lam > best[0]:
                best = (lam, j, xi)
        tau = PureState(shape, best[1], best[2] / np.linalg.norm(best[2]))
        cert = LocalizedFamily(tau, (np.eye(space.block_dim(best[1]), dtype=complex),))
        v = vec_norm(t[0])
        return NormEstimate(v, EXACT, cert, "pure-state", {}, 0.0, v, v)

    localized: list[LocalizedFamily] = [s for s in seeds if isinstance(s, LocalizedFamily)]
    for s in seeds:
        if isinstance(s, ProjectionFamily):
            tau, _ = transfer_to_purestate(s, t)
            localized.append(LocalizedFamily(tau, tuple(P.blocks[tau.block] for P in s.projections)))
    inner_cfg = cfg.with_(restarts=max(2, cfg.restarts // 8))
    effort = {"states": 0, "inner_solves": 0}
    best_val, best_cert = -1.0, None
    for j, k in enumerate(shape.blocks):
        Xs = t.block_stack(j)
        if not np.any(Xs):
            continue
        rngs = restart_rngs(cfg.seed, cfg.restarts, salt=30 + j)
        starts: list[tuple[np.ndarray, list | None]] = []
        for s in localized:
            if s.state.block == j:
                starts.append((s.state.vector, list(s.projections)))
        starts += [(np.eye(k, dtype=complex)[:, r], None) for r in range(k)]
        if k > 1:
            starts.append((_top_eig(sum(X.conj().T @ X for X in Xs))[1], None))
            for rng in rngs[: min(len(rngs), 2 * k)]:
                z = rng.standard_normal(k) + 1j * rng.standard_normal(k)
                starts.append((z / np.linalg.norm(z), None))
        for s_idx, (xi, fam) in enumerate(starts):
            inner_rngs = restart_rngs(cfg.seed, inner_cfg.restarts, salt=1000 * (j + 1) + s_idx)
            val, xi, fam, solves = _alternate_state(Xs, xi, fam, inner_cfg, inner_rngs, max_rounds=1 if k == 1 else 50)
            effort["states"] += 1
            effort["inner_solves"] += solves
            if val > best_val:
                best_val = val
                best_cert = LocalizedFamily(PureState(shape, j, xi), tuple(fam))
    if best_cert is None:  # zero tuple
        tau = PureState(shape, 0, np.eye(shape.blocks[0], dtype=complex)[:, 0])
        best_cert = LocalizedFamily(tau, tuple(_single_slot_family(n, space.block_dim(0), 0)))
    value = best_cert.evaluate(t)
    return NormEstimate(value, LOWER, best_cert, "pure-state", effort, cfg.obj_tol, lo, hi)


def _alternate_state(Xs, xi, fam, cfg, rngs, max_rounds):
    """Alternate: Hilbert-space solve at ``xi``; then ``xi`` <- top eigenvector of ``sum X_i^* P_i X_i``."""
    xi = xi / np.linalg.norm(xi)
    seeds = [fam] if fam is not None else []
    vecs = (Xs @ xi)[:, :, None]
    val, fam, _ = hilbert_block(vecs, cfg, rngs, seeds)
    solves = 1
    if fam is not None and seeds:
        v_seed = _value_sq(vecs, seeds[0])
        if v_seed > val:
            val, fam = v_seed, seeds[0]
    for _ in range(max_rounds - 1):
        lam, xi_new = _top_eig(sum(X.conj().T @ P @ X for X, P in zip(Xs, fam)))
        if lam <= val + 1e-12 * max(1.0, val):
            break
        xi = xi_new
        vecs = (Xs @ xi)[:, :, None]
        val_new, fam_new, _ = hilbert_block(vecs, cfg, rngs, [fam])
        solves += 1
        if val_new <= val + 1e-14 * max(1.0, val):
            val, fam = max(val_new, val), fam_new if val_new > val else fam
            break
        val, fam = val_new, fam_new
    return val, xi, fam, solves


def two_two_multinorm(t: ModuleTuple, cfg: OptimizerConfig | None = None, seeds: Sequence = ()) -> NormEstimate:
    """``(2,2)`` multi-norm of a Hilbert space: the ``*`` multi-norm over scalars."""
    _require_scalar(t)
    est = star_multinorm(t, cfg, seeds)
    est.method = "two-two"
    return est


def _require_scalar(t: ModuleTuple) -> None:
    if t.space.shape.blocks != (1,):
        raise UnsupportedShapeError(f"needs the scalar algebra (1,), got {t.space.shape.blocks}")


# ---------------------------------------------------------------------------
# certificate transfers


def transfer_projection_certificate(family, t: ModuleTuple, eps: float) -> ModuleTuple:
    """Dual tuple ``y_i = P_i x_i (|P_i x_i|^2 + eps/n)^{-1/2}`` built from a projection family.

    The ``y_i`` have orthogonal ranges and ``<y_i, y_i> <= 1``, so
    ``mu_star(y) <= 1`` while ``||sum |<y_i, x_i>|^2|| >= ||sum P_i x_i||^2 - eps``.
    """
    family = _as_family(family)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if len(family.projections) != len(t):
        raise InfeasibleFamilyError("family and tuple have different lengths")
    if not family.is_feasible(1e-9):
        raise InfeasibleFamilyError("projections are not mutually orthogonal or do not sum to I")
    n = len(t)
    delta = eps / n
    out = []
    for P, x in zip(family.projections, t):
        px = P @ x
        weight = functional_calculus(inner(px, px), lambda s: 1.0 / np.sqrt(np.clip(s, 0.0, None) + delta))
        out.append(px * weight)
    return ModuleTuple(out, t.space)


def transfer_to_purestate(family, t: ModuleTuple) -> tuple[PureState, float]:
    """Pure state attaining ``||sum |P_i x_i|^2||`` and the value ``||sum P_i x_i||``."""
    family = _as_family(family)
    if len(family.projections) != len(t):
        raise InfeasibleFamilyError("family and tuple have different lengths")
    if not family.is_feasible(1e-9):
        raise InfeasibleFamilyError("projections are not mutually orthogonal or do not sum to I")
    shape = t.space.shape
    total = AlgebraElement.zeros(shape)
    for P, x in zip(family.projections, t):
        px = P @ x
        total = total + inner(px, px)
    best = None
    for j, b in enumerate(total.data):
        lam, xi = _top_eig(b)
        if best is None or lam > best[0] + 1e-15:
            best = (lam, j, xi)
    lam, j, xi = best
    return PureState(shape, j, xi / np.linalg.norm(xi)), float(np.sqrt(max(lam, 0.0)))


def localized_family(family, tau: PureState) -> LocalizedFamily:
    family = _as_family(family)
    return LocalizedFamily(tau, tuple(P.blocks[tau.block].copy() for P in family.projections))


def merge_duplicate_certificate(y: ModuleTuple, x: ModuleVector, eps: float) -> ModuleTuple:
    """Fold the last two entries of a dual tuple that face the same vector ``x``.

    With ``c_1 = <y_{n-1}, x>``, ``c_2 = <y_n, x>``, ``a = (|c_1|^2 + |c_2|^2)^{1/2}``
    and ``e0 = eps / (4||a|| + eps)`` the merged entry is
    ``y_{n-1} c_1 (a + e0)^{-1} + y_n c_2 (a + e0)^{-1}``.  The shorter tuple has
    ``mu_star`` no larger and loses at most ``eps`` in the squared objective.
    """
    if len(y) < 2:
        raise ValueError("need at least two entries to merge")
    if eps <= 0:
        raise ValueError("eps must be positive")
    y1, y2 = y[len(y) - 2], y[len(y) - 1]
    c1, c2 = inner(y1, x), inner(y2, x)
    a2 = c1.adjoint() * c1 + c2.adjoint() * c2
    a_norm = float(np.sqrt(alg_norm(a2)))
    e0 = eps / (4 * a_norm + eps)
    inv = functional_calculus(a2, lambda s: 1.0 / (np.sqrt(np.clip(s, 0.0, None)) + e0))
    merged = y1 * (c1 * inv) + y2 * (c2 * inv)
    return ModuleTuple(list(y.entries[:-2]) + [merged], y.space)


NORMS = {
    "mu-star": lambda t, cfg=None, seeds=(): mu_star(t),
    "min": lambda t, cfg=None, seeds=(): min_multinorm(t),
    "star": star_multinorm,
    "hilbert": hilbert_multinorm,
    "pure-state": purestate_multinorm,
    "two-two": two_two_multinorm,
}
