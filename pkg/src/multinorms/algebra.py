"""Finite-dimensional C*-algebras presented as direct sums of matrix blocks.

An algebra is fixed by its block sizes ``(k_1, ..., k_B)``; an element holds one
dense complex ``k_j x k_j`` matrix per block.  The C*-norm is the largest
singular value over all blocks.  Pure states are vector states supported on a
single block (characters when every block is 1x1).
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Callable, Iterable, Sequence

import numpy as np

TOL_PSD = 1e-9


class ShapeMismatchError(ValueError):
    """Raised when operands live in different algebras or modules."""


class NotPositiveError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class AlgebraShape:
    """Block sizes of ``A = M_{k_1} + ... + M_{k_B}``."""

    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(k) for k in self.blocks)
        if not blocks:
            raise ValueError("an algebra needs at least one block")
        if any(k < 1 for k in blocks):
            raise ValueError(f"block sizes must be positive, got {blocks}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def is_commutative(self) -> bool:
        return all(k == 1 for k in self.blocks)

    @property
    def total(self) -> int:
        return sum(self.blocks)

    def __repr__(self) -> str:
        return f"AlgebraShape{self.blocks}"


def _as_shape(shape) -> AlgebraShape:
    if isinstance(shape, AlgebraShape):
        return shape
    return AlgebraShape(tuple(shape))


class AlgebraElement:
    """An element of a block algebra.

    Instances are treated as immutable values; arithmetic always returns new
    objects.  ``*`` is the algebra product (or scaling by a complex number).
    """

    __slots__ = ("shape", "data")

    def __init__(self, shape, data: Sequence[np.ndarray]):
        shape = _as_shape(shape)
        if len(data) != shape.num_blocks:
            raise ShapeMismatchError(
                f"expected {shape.num_blocks} blocks, got {len(data)}"
            )
        blocks = []
        for j, (k, d) in enumerate(zip(shape.blocks, data)):
            arr = np.asarray(d, dtype=complex)
            if arr.shape != (k, k):
                raise ShapeMismatchError(
                    f"block {j}: expected shape {(k, k)}, got {arr.shape}"
                )
            blocks.append(arr)
        self.shape = shape
        self.data = tuple(blocks)

    # -- constructors ---------------------------------------------------
    @classmethod
    def zeros(cls, shape) -> "AlgebraElement":
        shape = _as_shape(shape)
        return cls(shape, [np.zeros((k, k), complex) for k in shape.blocks])

    @classmethod
    def identity(cls, shape) -> "AlgebraElement":
        shape = _as_shape(shape)
        return cls(shape, [np.eye(k, dtype=complex) for k in shape.blocks])

    @classmethod
    def from_values(cls, values: Iterable[complex]) -> "AlgebraElement":
        """Element of the commutative algebra ``C^B`` with the given values."""
        values = list(values)
        return cls(AlgebraShape((1,) * len(values)), [np.array([[v]]) for v in values])

    @classmethod
    def random(cls, shape, rng: np.random.Generator, scale: float = 1.0) -> "AlgebraElement":
        shape = _as_shape(shape)
        return cls(
            shape,
            [
                scale * (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
                for k in shape.blocks
            ],
        )

    # -- arithmetic -----------------------------------------------------
    def _check(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.shape != self.shape:
            raise ShapeMismatchError(f"{self.shape} vs {other.shape}")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.shape, [a + b for a, b in zip(self.data, other.data)])

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.shape, [a - b for a, b in zip(self.data, other.data)])

    def __neg__(self):
        return AlgebraElement(self.shape, [-a for a in self.data])

    def __mul__(self, other):
        if isinstance(other, Number):
            return AlgebraElement(self.shape, [other * a for a in self.data])
        self._check(other)
        return AlgebraElement(self.shape, [a @ b for a, b in zip(self.data, other.data)])

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self.__mul__(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            return AlgebraElement(self.shape, [a / other for a in self.data])
        return NotImplemented

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.shape, [a.conj().T for a in self.data])

    def hermitian_part(self) -> "AlgebraElement":
        return AlgebraElement(self.shape, [(a + a.conj().T) / 2 for a in self.data])

    def allclose(self, other: "AlgebraElement", atol: float = 1e-10) -> bool:
        self._check(other)
        return alg_norm(self - other) <= atol

    def __repr__(self) -> str:
        return f"AlgebraElement({self.shape.blocks}, {[b.tolist() for b in self.data]})"


def alg_arith(op: str, *operands):
    """Dispatch ``add | mul | adjoint | scale`` on algebra elements.

    ``scale`` takes ``(element, scalar)``.
    """
    if op == "add":
        a, b = operands
        return a + b
    if op == "mul":
        a, b = operands
        return a * b
    if op == "adjoint":
        (a,) = operands
        return a.adjoint()
    if op == "scale":
        a, s = operands
        return a * complex(s)
    raise ValueError(f"unknown operation {op!r}")


def alg_norm(a: AlgebraElement) -> float:
    return max(float(np.linalg.norm(b, 2)) if b.size else 0.0 for b in a.data)


def _eigh(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigh((block + block.conj().T) / 2)


def _require_hermitian(a: AlgebraElement, tol: float) -> None:
    scale = max(1.0, alg_norm(a))
    if alg_norm(a - a.adjoint()) > tol * scale:
        raise NotHermitianError("element is not Hermitian within tolerance")


def functional_calculus(
    a: AlgebraElement, f: Callable[[np.ndarray], np.ndarray], tol: float = 1e-8
) -> AlgebraElement:
    """Apply ``f`` to the spectrum of a Hermitian element, block by block."""
    _require_hermitian(a, tol)
    out = []
    for b in a.data:
        w, v = _eigh(b)
        out.append((v * np.asarray(f(w), dtype=complex)) @ v.conj().T)
    return AlgebraElement(a.shape, out)


def positive_sqrt(a: AlgebraElement, tol_psd: float = TOL_PSD) -> AlgebraElement:
    """Unique positive square root; eigenvalues in ``[-tol_psd, 0)`` clamp to zero."""
    _require_hermitian(a, 1e-8)
    out = []
    for b in a.data:
        w, v = _eigh(b)
        if w.size and w[0] < -tol_psd:
            raise NotPositiveError(f"minimum eigenvalue {w[0]:.3e} below -{tol_psd}")
        out.append((v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T)
    return AlgebraElement(a.shape, out)


def min_eigenvalue(a: AlgebraElement) -> float:
    return min(float(_eigh(b)[0][0]) for b in a.data)


def is_positive(a: AlgebraElement, tol: float = TOL_PSD) -> bool:
    if alg_norm(a - a.adjoint()) > tol * max(1.0, alg_norm(a)):
        return False
    return min_eigenvalue(a) >= -tol


def is_projection(a: AlgebraElement, tol: float = 1e-9) -> bool:
    return alg_norm(a * a - a) <= tol and alg_norm(a.adjoint() - a) <= tol


def is_unitary(a: AlgebraElement, tol: float = 1e-9) -> bool:
    one = AlgebraElement.identity(a.shape)
    return alg_norm(a.adjoint() * a - one) <= tol and alg_norm(a * a.adjoint() - one) <= tol


@dataclass(frozen=True, eq=False)
class PureState:
    """Vector state ``a -> <a_j xi, xi>`` on block ``j``."""

    shape: AlgebraShape
    block: int
    vector: np.ndarray

    def __post_init__(self):
        shape = _as_shape(self.shape)
        object.__setattr__(self, "shape", shape)
        if not 0 <= self.block < shape.num_blocks:
            raise ValueError(f"block index {self.block} out of range for {shape}")
        vec = np.asarray(self.vector, dtype=complex).reshape(-1)
        if vec.shape != (shape.blocks[self.block],):
            raise ShapeMismatchError(
                f"state vector has length {vec.size}, block {self.block} has size "
                f"{shape.blocks[self.block]}"
            )
        if abs(np.linalg.norm(vec) - 1.0) > 1e-12:
            raise ValueError("state vector must have unit norm")
        object.__setattr__(self, "vector", vec)

    def __call__(self, a: AlgebraElement) -> complex:
        return state_eval(self, a)


def state_eval(tau: PureState, a: AlgebraElement) -> complex:
    if a.shape != tau.shape:
        raise ShapeMismatchError(f"{tau.shape} vs {a.shape}")
    xi = tau.vector
    return complex(np.vdot(xi, a.data[tau.block] @ xi))


def unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def pure_state_sampler(shape, rng: np.random.Generator) -> PureState:
    """Random pure state: block drawn with probability ``k_j / sum(k)``, Haar vector."""
    shape = _as_shape(shape)
    weights = np.array(shape.blocks, dtype=float)
    j = int(rng.choice(shape.num_blocks, p=weights / weights.sum()))
    return PureState(shape, j, unit_vector(shape.blocks[j], rng))


def enumerate_characters(shape) -> list[PureState]:
    shape = _as_shape(shape)
    if not shape.is_commutative:
        raise ValueError(f"{shape} is not commutative; pure states are not a finite set")
    return [PureState(shape, j, np.ones(1)) for j in range(shape.num_blocks)]
