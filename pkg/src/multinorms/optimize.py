"""Optimization kernels: Haar sampling, ascent on U(d) and on the unit sphere, rank enumeration."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from itertools import combinations
from math import comb
from typing import Callable, Iterator

import numpy as np


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_iters: int = 200
    step: float = 0.05
    fd_step: float = 1e-5
    obj_tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        for name in ("restarts", "max_iters"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("step", "fd_step", "obj_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if int(self.seed) < 0:
            raise ValueError("seed must be nonnegative")

    def with_(self, **changes) -> "OptimizerConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_CONFIG = OptimizerConfig()


def restart_rngs(seed: int, count: int, salt: int = 0) -> list[np.random.Generator]:
    """Independent per-restart streams derived from ``(seed, salt)``."""
    seq = np.random.SeedSequence([int(seed), int(salt)])
    return [np.random.default_rng(s) for s in seq.spawn(count)]


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def polar(g: np.ndarray) -> np.ndarray:
    """Unitary (or partial isometry) factor ``U V^*`` of the thin SVD of ``g``."""
    u, _, vh = np.linalg.svd(g, full_matrices=False)
    return u @ vh


def _skew_basis(dim: int) -> list[np.ndarray]:
    basis = []
    for a in range(dim):
        e = np.zeros((dim, dim), complex)
        e[a, a] = 1j
        basis.append(e)
    for a in range(dim):
        for b in range(a + 1, dim):
            e = np.zeros((dim, dim), complex)
            e[a, b], e[b, a] = 1.0, -1.0
            basis.append(e / np.sqrt(2))
            e = np.zeros((dim, dim), complex)
            e[a, b] = e[b, a] = 1j
            basis.append(e / np.sqrt(2))
    return basis


def _line_search(f, point, direction, f0, t, retract, max_halvings=30):
    while max_halvings:
        cand = retract(point, t * direction)
        fc = f(cand)
        if fc > f0:
            return cand, fc, t
        t *= 0.5
        max_halvings -= 1
    return None, f0, t


def _ascend(f, start, directions, retract, cfg):
    """Forward-difference gradient ascent with backtracking on a matrix manifold."""
    x, fx = start, f(start)
    t = cfg.step
    its = 0
    for its in range(1, cfg.max_iters + 1):
        g = np.array([(f(retract(x, cfg.fd_step * d)) - fx) / cfg.fd_step for d in directions])
        gnorm = np.linalg.norm(g)
        if gnorm < 1e-14:
            break
        direction = sum(gi * d for gi, d in zip(g, directions)) / gnorm
        new, fn, t_used = _line_search(f, x, direction, fx, 2 * t, retract)
        if new is None:
            break
        gain = fn - fx
        x, fx, t = new, fn, t_used
        if gain < cfg.obj_tol * max(1.0, abs(fx)):
            break
    return x, fx, its


def _retract_unitary(u, d):
    return polar(u @ (np.eye(u.shape[0]) + d))


def unitary_ascent(
    objective: Callable[[np.ndarray], float],
    dim: int,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    init: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Maximize ``objective`` over ``U(dim)``; best over restarts.

    Restart 0 starts at ``init`` (identity when omitted); the rest start at
    Haar samples.  The result is never worse than any starting point.
    """
    directions = _skew_basis(dim)
    best_u, best_val = None, -np.inf
    for r, rng in enumerate(restart_rngs(cfg.seed, cfg.restarts, salt=dim)):
        if r == 0:
            start = np.eye(dim, dtype=complex) if init is None else np.asarray(init, complex)
        else:
            start = haar_unitary(dim, rng)
        u, val, _ = _ascend(objective, start, directions, _retract_unitary, cfg)
        if val > best_val:
            best_u, best_val = u, val
    return best_u, float(best_val)


def _retract_sphere(x, d):
    y = x + d
    return y / np.linalg.norm(y)


def sphere_ascent(
    objective: Callable[[np.ndarray], float],
    dim: int,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    init: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Maximize ``objective`` over unit vectors in ``C^dim``."""
    directions = []
    for a in range(dim):
        e = np.zeros(dim, complex)
        e[a] = 1.0
        directions += [e, 1j * e]
    best_x, best_val = None, -np.inf
    for r, rng in enumerate(restart_rngs(cfg.seed, cfg.restarts, salt=1000 + dim)):
        if r == 0 and init is not None:
            start = np.asarray(init, complex) / np.linalg.norm(init)
        else:
            z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            start = z / np.linalg.norm(z)
        if dim == 1:
            x, val = start, objective(start)
        else:
            x, val, _ = _ascend(objective, start, directions, _retract_sphere, cfg)
        if val > best_val:
            best_x, best_val = x, val
    return best_x, float(best_val)


def rank_assignments(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ``parts``-tuples of nonnegative integers summing to ``total``, lexicographic."""
    if total < 0 or parts < 1:
        raise ValueError("need total >= 0 and parts >= 1")
    # stars and bars: bar positions in increasing order give lexicographic output
    for bars in combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 2 - prev)
        yield tuple(out)


def count_rank_assignments(total: int, parts: int) -> int:
    return comb(total + parts - 1, parts - 1)
