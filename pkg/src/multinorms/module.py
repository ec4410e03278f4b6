"""Free Hilbert modules ``l^2_p(A)`` over a block algebra.

A vector ``x = (x_1, ..., x_p)`` is stored per block ``j`` as the stacked
``(p*k_j) x k_j`` matrix whose ``i``-th ``k_j x k_j`` slab is the block-``j``
part of ``x_i``.  With this layout

* the inner product ``<x, y> = sum_i x_i^* y_i`` is ``X_j^* Y_j`` per block,
* the right action ``x a`` is ``X_j a_j``,
* an adjointable operator (an element of ``M_p(A)``) is a ``(p*k_j)``-square
  matrix per block acting by left multiplication.

In finite dimensions the compact operators ``K(X)`` and ``L(X)`` coincide, so
both are represented by :class:`OperatorOnModule`.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Sequence

import numpy as np

from .algebra import (
    AlgebraElement,
    AlgebraShape,
    ShapeMismatchError,
    _as_shape,
    alg_norm,
    is_projection,
    positive_sqrt,
)

ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class ModuleSpace:
    shape: AlgebraShape
    rank: int

    def __post_init__(self):
        object.__setattr__(self, "shape", _as_shape(self.shape))
        if int(self.rank) < 1:
            raise ValueError("module rank must be positive")
        object.__setattr__(self, "rank", int(self.rank))

    @property
    def o_dim(self) -> int:
        return self.rank * self.shape.total

    def block_dim(self, j: int) -> int:
        """Dimension ``p*k_j`` of the block-``j`` column space."""
        return self.rank * self.shape.blocks[j]

    def __repr__(self) -> str:
        return f"ModuleSpace({self.shape.blocks}, rank={self.rank})"


def _check_space(a, b) -> None:
    if a.space != b.space:
        raise ShapeMismatchError(f"{a.space} vs {b.space}")


class ModuleVector:
    __slots__ = ("space", "blocks")

    def __init__(self, space: ModuleSpace, blocks: Sequence[np.ndarray]):
        if len(blocks) != space.shape.num_blocks:
            raise ShapeMismatchError("wrong number of blocks for module vector")
        arrs = []
        for j, (k, b) in enumerate(zip(space.shape.blocks, blocks)):
            arr = np.asarray(b, dtype=complex)
            if arr.shape != (space.rank * k, k):
                raise ShapeMismatchError(
                    f"block {j}: expected {(space.rank * k, k)}, got {arr.shape}"
                )
            arrs.append(arr)
        self.space = space
        self.blocks = tuple(arrs)

    @classmethod
    def from_coords(cls, space: ModuleSpace, coords: Sequence[AlgebraElement]) -> "ModuleVector":
        if len(coords) != space.rank:
            raise ShapeMismatchError(f"expected {space.rank} coordinates, got {len(coords)}")
        for c in coords:
            if c.shape != space.shape:
                raise ShapeMismatchError(f"coordinate in {c.shape}, module over {space.shape}")
        blocks = [
            np.vstack([c.data[j] for c in coords]) for j in range(space.shape.num_blocks)
        ]
        return cls(space, blocks)

    @classmethod
    def zeros(cls, space: ModuleSpace) -> "ModuleVector":
        return cls(space, [np.zeros((space.rank * k, k), complex) for k in space.shape.blocks])

    @classmethod
    def random(cls, space: ModuleSpace, rng: np.random.Generator, scale: float = 1.0) -> "ModuleVector":
        blocks = []
        for k in space.shape.blocks:
            m = space.rank * k
            blocks.append(scale * (rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))) / np.sqrt(2))
        return cls(space, blocks)

    @property
    def coords(self) -> list[AlgebraElement]:
        p = self.space.rank
        out = []
        for i in range(p):
            out.append(
                AlgebraElement(
                    self.space.shape,
                    [b[i * k:(i + 1) * k] for b, k in zip(self.blocks, self.space.shape.blocks)],
                )
            )
        return out

    def __add__(self, other):
        _check_space(self, other)
        return ModuleVector(self.space, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        _check_space(self, other)
        return ModuleVector(self.space, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return ModuleVector(self.space, [-a for a in self.blocks])

    def __mul__(self, other):
        """Right action by an algebra element, or scaling by a number."""
        if isinstance(other, Number):
            return ModuleVector(self.space, [other * a for a in self.blocks])
        if isinstance(other, AlgebraElement):
            if other.shape != self.space.shape:
                raise ShapeMismatchError(f"{self.space.shape} vs {other.shape}")
            return ModuleVector(self.space, [x @ a for x, a in zip(self.blocks, other.data)])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self.__mul__(other)
        return NotImplemented

    def allclose(self, other: "ModuleVector", atol: float = 1e-10) -> bool:
        _check_space(self, other)
        return vec_norm(self - other) <= atol

    def __repr__(self) -> str:
        return f"ModuleVector({self.space!r})"


class ModuleTuple:
    """An ``n``-tuple of vectors in one module space."""

    __slots__ = ("space", "entries")

    def __init__(self, entries: Sequence[ModuleVector], space: ModuleSpace | None = None):
        entries = tuple(entries)
        if not entries and space is None:
            raise ValueError("empty tuple needs an explicit space")
        space = space if space is not None else entries[0].space
        for e in entries:
            if e.space != space:
                raise ShapeMismatchError("tuple entries live in different spaces")
        self.space = space
        self.entries = entries

    @property
    def n(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return ModuleTuple(self.entries[i], self.space)
        return self.entries[i]

    def permuted(self, perm: Sequence[int]) -> "ModuleTuple":
        return ModuleTuple([self.entries[i] for i in perm], self.space)

    def appended(self, x: ModuleVector) -> "ModuleTuple":
        return ModuleTuple(self.entries + (x,), self.space)

    def right_act(self, coeffs: Sequence) -> "ModuleTuple":
        """Entrywise ``x_i a_i``."""
        return ModuleTuple([x * a for x, a in zip(self.entries, coeffs)], self.space)

    def __add__(self, other: "ModuleTuple") -> "ModuleTuple":
        if other.n != self.n:
            raise ShapeMismatchError("tuples of different length")
        return ModuleTuple([a + b for a, b in zip(self.entries, other.entries)], self.space)

    def block_stack(self, j: int) -> np.ndarray:
        """Array of shape ``(n, p*k_j, k_j)`` holding block ``j`` of every entry."""
        k = self.space.shape.blocks[j]
        if not self.entries:
            return np.zeros((0, self.space.rank * k, k), complex)
        return np.stack([e.blocks[j] for e in self.entries])

    @classmethod
    def random(cls, space: ModuleSpace, n: int, rng: np.random.Generator) -> "ModuleTuple":
        return cls([ModuleVector.random(space, rng) for _ in range(n)], space)

    @classmethod
    def zeros(cls, space: ModuleSpace, n: int) -> "ModuleTuple":
        return cls([ModuleVector.zeros(space) for _ in range(n)], space)

    def __repr__(self) -> str:
        return f"ModuleTuple(n={self.n}, {self.space!r})"


class OperatorOnModule:
    """Element of ``M_p(A)`` acting on ``l^2_p(A)``; one square matrix per block."""

    __slots__ = ("space", "blocks")

    def __init__(self, space: ModuleSpace, blocks: Sequence[np.ndarray]):
        if len(blocks) != space.shape.num_blocks:
            raise ShapeMismatchError("wrong number of blocks for operator")
        arrs = []
        for j, b in enumerate(blocks):
            m = space.block_dim(j)
            arr = np.asarray(b, dtype=complex)
            if arr.shape != (m, m):
                raise ShapeMismatchError(f"block {j}: expected {(m, m)}, got {arr.shape}")
            arrs.append(arr)
        self.space = space
        self.blocks = tuple(arrs)

    @classmethod
    def identity(cls, space: ModuleSpace) -> "OperatorOnModule":
        return cls(space, [np.eye(space.block_dim(j), dtype=complex) for j in range(space.shape.num_blocks)])

    @classmethod
    def zeros(cls, space: ModuleSpace) -> "OperatorOnModule":
        return cls(space, [np.zeros((space.block_dim(j),) * 2, complex) for j in range(space.shape.num_blocks)])

    @classmethod
    def random(cls, space: ModuleSpace, rng: np.random.Generator) -> "OperatorOnModule":
        blocks = []
        for j in range(space.shape.num_blocks):
            m = space.block_dim(j)
            blocks.append((rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2))
        return cls(space, blocks)

    @classmethod
    def from_entries(cls, space: ModuleSpace, entries: Sequence[Sequence[AlgebraElement]]) -> "OperatorOnModule":
        """Build from a ``p x p`` array of algebra elements."""
        p = space.rank
        if len(entries) != p or any(len(row) != p for row in entries):
            raise ShapeMismatchError(f"expected a {p}x{p} array of algebra elements")
        blocks = []
        for j in range(space.shape.num_blocks):
            blocks.append(np.block([[entries[i][l].data[j] for l in range(p)] for i in range(p)]))
        return cls(space, blocks)

    def entry(self, i: int, l: int) -> AlgebraElement:
        ks = self.space.shape.blocks
        return AlgebraElement(
            self.space.shape,
            [b[i * k:(i + 1) * k, l * k:(l + 1) * k] for b, k in zip(self.blocks, ks)],
        )

    def __call__(self, x: ModuleVector) -> ModuleVector:
        return op_apply(self, x)

    def __matmul__(self, other):
        if isinstance(other, OperatorOnModule):
            _check_space(self, other)
            return OperatorOnModule(self.space, [a @ b for a, b in zip(self.blocks, other.blocks)])
        if isinstance(other, ModuleVector):
            return op_apply(self, other)
        return NotImplemented

    def __add__(self, other):
        _check_space(self, other)
        return OperatorOnModule(self.space, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        _check_space(self, other)
        return OperatorOnModule(self.space, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, other):
        if isinstance(other, Number):
            return OperatorOnModule(self.space, [other * a for a in self.blocks])
        return NotImplemented

    __rmul__ = __mul__

    def adjoint(self) -> "OperatorOnModule":
        return OperatorOnModule(self.space, [b.conj().T for b in self.blocks])

    def is_projection(self, tol: float = ORTHO_TOL) -> bool:
        return all(
            np.linalg.norm(b @ b - b, 2) <= tol and np.linalg.norm(b - b.conj().T, 2) <= tol
            for b in self.blocks
        )

    def __repr__(self) -> str:
        return f"OperatorOnModule({self.space!r})"


# ---------------------------------------------------------------------------
# inner products and norms


def inner(x: ModuleVector, y: ModuleVector) -> AlgebraElement:
    _check_space(x, y)
    return AlgebraElement(x.space.shape, [a.conj().T @ b for a, b in zip(x.blocks, y.blocks)])


def vec_abs(x: ModuleVector) -> AlgebraElement:
    return positive_sqrt(inner(x, x))


def vec_norm(x: ModuleVector) -> float:
    # ||<x,x>||^{1/2} is the largest singular value of the stacked block
    return max(float(np.linalg.norm(b, 2)) for b in x.blocks)


def theta(y: ModuleVector, x: ModuleVector) -> OperatorOnModule:
    """The operator ``z -> y <x, z>``."""
    _check_space(x, y)
    return OperatorOnModule(x.space, [b @ a.conj().T for a, b in zip(x.blocks, y.blocks)])


def op_apply(T: OperatorOnModule, x: ModuleVector) -> ModuleVector:
    _check_space(T, x)
    return ModuleVector(x.space, [t @ b for t, b in zip(T.blocks, x.blocks)])


def op_norm(T: OperatorOnModule) -> float:
    return max(float(np.linalg.norm(b, 2)) for b in T.blocks)


def op_arith(op: str, *operands):
    if op == "add":
        return operands[0] + operands[1]
    if op == "mul":
        return operands[0] @ operands[1]
    if op == "adjoint":
        return operands[0].adjoint()
    if op == "scale":
        return operands[0] * complex(operands[1])
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# orthonormal bases


def basic_vector(space: ModuleSpace, coord: int, block: int, row: int, column: int = 0) -> ModuleVector:
    """Coordinate ``coord`` holds ``e_row e_column^*`` in ``block``; zero elsewhere."""
    blocks = [np.zeros((space.rank * k, k), complex) for k in space.shape.blocks]
    k = space.shape.blocks[block]
    blocks[block][coord * k + row, column] = 1.0
    return ModuleVector(space, blocks)


def orthonormal_basis(space: ModuleSpace) -> list[ModuleVector]:
    """``p * sum(k_j)`` basic vectors, first-column convention."""
    return [
        basic_vector(space, i, j, r)
        for i in range(space.rank)
        for j, k in enumerate(space.shape.blocks)
        for r in range(k)
    ]


def reconstruct(basis: Sequence[ModuleVector], x: ModuleVector) -> ModuleVector:
    """``sum_u u <u, x>``."""
    out = ModuleVector.zeros(x.space)
    for u in basis:
        out = out + u * inner(u, x)
    return out


def lemma_base_transform(basis: Sequence[ModuleVector], targets: Sequence[np.ndarray]) -> list[ModuleVector]:
    """Rotate each basic vector so its self inner product becomes ``theta(eta, eta)``.

    With ``<u, u> = xi xi^*`` the new vector is ``u (xi eta^*)``.  Only defined
    over a single matrix block.
    """
    if not basis:
        return []
    space = basis[0].space
    if space.shape.num_blocks != 1:
        raise ValueError("basis rotation is defined for a single matrix block only")
    if len(targets) != len(basis):
        raise ValueError("need one target vector per basis element")
    k = space.shape.blocks[0]
    out = []
    for u, eta in zip(basis, targets):
        eta = np.asarray(eta, dtype=complex).reshape(-1)
        if eta.shape != (k,) or abs(np.linalg.norm(eta) - 1.0) > 1e-10:
            raise ValueError("targets must be unit vectors in C^k")
        e = inner(u, u).data[0]
        w, v = np.linalg.eigh((e + e.conj().T) / 2)
        xi = v[:, -1]
        rot = AlgebraElement(space.shape, [np.outer(xi, eta.conj())])
        out.append(u * rot)
    return out


# ---------------------------------------------------------------------------
# orthogonal tuples and absolutely convex combinations


class OrthoTuple:
    """A tuple with pairwise orthogonal entries whose self inner products are projections."""

    __slots__ = ("tuple", "projections")

    def __init__(self, entries: ModuleTuple, tol: float = ORTHO_TOL):
        projections = [inner(v, v) for v in entries]
        for i, pr in enumerate(projections):
            if not is_projection(pr, tol):
                raise ValueError(f"<v_{i}, v_{i}> is not a projection")
        for i in range(entries.n):
            for l in range(i + 1, entries.n):
                if alg_norm(inner(entries[i], entries[l])) > tol:
                    raise ValueError(f"entries {i} and {l} are not orthogonal")
        self.tuple = entries
        self.projections = tuple(projections)

    @property
    def n(self) -> int:
        return self.tuple.n


def _haar(dim: int, rng: np.random.Generator) -> np.ndarray:
    from .optimize import haar_unitary

    return haar_unitary(dim, rng)


def sample_D_n(space: ModuleSpace, n: int, rng: np.random.Generator) -> OrthoTuple:
    """Random member of the set of mutually orthogonal ``n``-tuples with projection lengths.

    Each entry is a sum of basic vectors ``e_r e_c^*`` taken from disjoint rows
    and distinct columns within each block, followed by a blockwise Haar
    rotation of the whole module.
    """
    if n > space.rank:
        raise ValueError(f"n = {n} exceeds the module rank {space.rank}")
    entries = [[np.zeros((space.rank * k, k), complex) for k in space.shape.blocks] for _ in range(n)]
    for j, k in enumerate(space.shape.blocks):
        m = space.rank * k
        rows = rng.permutation(m)
        pos = 0
        for i in range(n):
            rank = int(rng.integers(0, k + 1))
            cols = rng.permutation(k)[:rank]
            for c in cols:
                entries[i][j][rows[pos], c] = 1.0
                pos += 1
    # every entry gets at least one block
    for i in range(n):
        if all(not b.any() for b in entries[i]):
            j = int(rng.integers(space.shape.num_blocks))
            used = np.flatnonzero(sum(np.abs(e[j]).sum(axis=1) for e in entries))
            free = np.setdiff1d(np.arange(space.block_dim(j)), used)
            entries[i][j][free[0], int(rng.integers(space.shape.blocks[j]))] = 1.0
    rots = [_haar(space.block_dim(j), rng) for j in range(space.shape.num_blocks)]
    vecs = [ModuleVector(space, [u @ b for u, b in zip(rots, e)]) for e in entries]
    return OrthoTuple(ModuleTuple(vecs, space))


def sample_aco(
    space: ModuleSpace,
    n: int,
    m_terms: int,
    rng: np.random.Generator,
    coefficients: Sequence[AlgebraElement] | None = None,
) -> ModuleTuple:
    """``sum_j z_j a_j`` with ``z_j`` orthogonal tuples and ``sum ||a_j|| <= 1``."""
    zs = [sample_D_n(space, n, rng) for _ in range(m_terms)]
    if coefficients is None:
        weights = rng.dirichlet(np.ones(m_terms))
        if rng.random() < 0.5:
            weights = weights * rng.random()
        coefficients = []
        for w in weights:
            a = AlgebraElement.random(space.shape, rng)
            coefficients.append(a * float(w / alg_norm(a)))
    elif len(coefficients) != m_terms:
        raise ValueError("need one coefficient per term")
    total = ModuleTuple.zeros(space, n)
    for z, a in zip(zs, coefficients):
        total = total + z.tuple.right_act([a] * n)
    return total
