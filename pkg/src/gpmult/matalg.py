"""Finite-dimensional C*-algebras as block-diagonal complex matrices.

An algebra is a direct sum of full matrix blocks, fixed by a
:class:`BlockStructure`.  Elements store one dense complex array per block.
Central elements are exactly the block scalars and get their own lightweight
vector representation.  Positivity of operator matrices over the algebra is
certified by flattening to one dense Hermitian matrix and inspecting its
spectrum; an independent pivoted-Cholesky cross-check lives in the test
suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NotCentralError,
    NotHermitianError,
    StructureMismatchError,
)

DEFAULT_POS_TOL = 1e-9
DEFAULT_CENTRAL_TOL = 1e-9


@dataclass(frozen=True)
class BlockStructure:
    """Dimensions d_1, ..., d_K of the matrix blocks."""

    block_dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims or any(d < 1 for d in dims):
            raise StructureMismatchError("block dims must be positive", dims=dims)
        object.__setattr__(self, "block_dims", dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def total_dim(self) -> int:
        return sum(self.block_dims)

    def offsets(self):
        out = []
        pos = 0
        for d in self.block_dims:
            out.append(pos)
            pos += d
        return out


class AlgebraElement:
    """One dense complex matrix per block."""

    __slots__ = ("structure", "blocks")

    def __init__(self, structure: BlockStructure, blocks):
        blocks = tuple(np.asarray(b, dtype=np.complex128) for b in blocks)
        if len(blocks) != structure.num_blocks:
            raise StructureMismatchError(
                "wrong number of blocks",
                expected=structure.num_blocks,
                got=len(blocks),
            )
        for k, b in enumerate(blocks):
            d = structure.block_dims[k]
            if b.shape != (d, d):
                raise StructureMismatchError(
                    "block has wrong shape", block=k, expected=(d, d), got=b.shape
                )
        self.structure = structure
        self.blocks = blocks

    # -- constructors --

    @classmethod
    def identity(cls, structure: BlockStructure) -> "AlgebraElement":
        return cls(structure, [np.eye(d) for d in structure.block_dims])

    @classmethod
    def zero(cls, structure: BlockStructure) -> "AlgebraElement":
        return cls(structure, [np.zeros((d, d)) for d in structure.block_dims])

    @classmethod
    def matrix_unit(cls, structure, block, row, col) -> "AlgebraElement":
        blocks = [np.zeros((d, d), dtype=np.complex128) for d in structure.block_dims]
        blocks[block][row, col] = 1.0
        return cls(structure, blocks)

    # -- arithmetic --

    def _check(self, other: "AlgebraElement") -> None:
        if self.structure != other.structure:
            raise StructureMismatchError("mixed block structures")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(
            self.structure, [a + b for a, b in zip(self.blocks, other.blocks)]
        )

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(
            self.structure, [a - b for a, b in zip(self.blocks, other.blocks)]
        )

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            self._check(other)
            return AlgebraElement(
                self.structure, [a @ b for a, b in zip(self.blocks, other.blocks)]
            )
        return AlgebraElement(self.structure, [other * a for a in self.blocks])

    def __rmul__(self, scalar):
        return AlgebraElement(self.structure, [scalar * a for a in self.blocks])

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.structure, [a.conj().T for a in self.blocks])

    def norm(self) -> float:
        """C*-norm: the largest block operator 2-norm."""
        return max(float(np.linalg.norm(b, 2)) for b in self.blocks)

    def maxabs_diff(self, other: "AlgebraElement") -> float:
        self._check(other)
        return max(
            float(np.max(np.abs(a - b))) if a.size else 0.0
            for a, b in zip(self.blocks, other.blocks)
        )

    def dense(self) -> np.ndarray:
        """The single block-diagonal matrix of size total_dim."""
        T = self.structure.total_dim
        out = np.zeros((T, T), dtype=np.complex128)
        for off, d, b in zip(
            self.structure.offsets(), self.structure.block_dims, self.blocks
        ):
            out[off : off + d, off : off + d] = b
        return out

    def __repr__(self):
        return f"AlgebraElement(dims={self.structure.block_dims})"


@dataclass(frozen=True, eq=False)
class CentralElement:
    """A central element: one complex scalar per block."""

    structure: BlockStructure
    scalars: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.scalars, dtype=np.complex128)
        if arr.shape != (self.structure.num_blocks,):
            raise StructureMismatchError(
                "need one scalar per block",
                expected=self.structure.num_blocks,
                got=arr.shape,
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "scalars", arr)

    @classmethod
    def one(cls, structure) -> "CentralElement":
        return cls(structure, np.ones(structure.num_blocks))

    @classmethod
    def zero(cls, structure) -> "CentralElement":
        return cls(structure, np.zeros(structure.num_blocks))

    @classmethod
    def constant(cls, structure, value) -> "CentralElement":
        return cls(structure, np.full(structure.num_blocks, value, dtype=np.complex128))

    def _check(self, other):
        if self.structure != other.structure:
            raise StructureMismatchError("mixed block structures")

    def __add__(self, other):
        self._check(other)
        return CentralElement(self.structure, self.scalars + other.scalars)

    def __sub__(self, other):
        self._check(other)
        return CentralElement(self.structure, self.scalars - other.scalars)

    def __mul__(self, other):
        if isinstance(other, CentralElement):
            self._check(other)
            return CentralElement(self.structure, self.scalars * other.scalars)
        return CentralElement(self.structure, other * self.scalars)

    def __rmul__(self, scalar):
        return CentralElement(self.structure, scalar * self.scalars)

    def conj(self) -> "CentralElement":
        return CentralElement(self.structure, self.scalars.conj())

    def norm(self) -> float:
        return float(np.max(np.abs(self.scalars))) if self.scalars.size else 0.0

    def maxabs_diff(self, other) -> float:
        self._check(other)
        return float(np.max(np.abs(self.scalars - other.scalars)))

    def __repr__(self):
        return f"CentralElement({list(self.scalars)})"


def central_exp(c: CentralElement) -> CentralElement:
    """Entrywise exponential, which is exp of the central element."""
    return CentralElement(c.structure, np.exp(c.scalars))


def embed_central(c: CentralElement) -> AlgebraElement:
    return AlgebraElement(
        c.structure,
        [z * np.eye(d) for z, d in zip(c.scalars, c.structure.block_dims)],
    )


def is_central(a: AlgebraElement, tol: float = DEFAULT_CENTRAL_TOL) -> bool:
    """Whether every block is within tol (Frobenius) of a scalar matrix."""
    for b, d in zip(a.blocks, a.structure.block_dims):
        z = np.trace(b) / d
        if float(np.linalg.norm(b - z * np.eye(d))) > tol:
            return False
    return True


def extract_central(a: AlgebraElement, tol: float = DEFAULT_CENTRAL_TOL) -> CentralElement:
    """Project a (numerically) central element onto its block scalars."""
    if not is_central(a, tol):
        raise NotCentralError("element is not central within tolerance", tol=tol)
    return CentralElement(
        a.structure,
        np.array([np.trace(b) / d for b, d in zip(a.blocks, a.structure.block_dims)]),
    )


class OperatorMatrix:
    """An n x n matrix with entries in the block algebra."""

    __slots__ = ("structure", "n", "entries")

    def __init__(self, structure: BlockStructure, entries):
        self.structure = structure
        self.entries = [list(row) for row in entries]
        self.n = len(self.entries)
        for row in self.entries:
            if len(row) != self.n:
                raise StructureMismatchError("entry grid is not square")
            for e in row:
                if not isinstance(e, AlgebraElement) or e.structure != structure:
                    raise StructureMismatchError("entry has wrong structure")

    @classmethod
    def from_central_grid(cls, structure, grid) -> "OperatorMatrix":
        return cls(
            structure, [[embed_central(c) for c in row] for row in grid]
        )

    def flatten(self) -> np.ndarray:
        T = self.structure.total_dim
        out = np.zeros((self.n * T, self.n * T), dtype=np.complex128)
        for i in range(self.n):
            for j in range(self.n):
                out[i * T : (i + 1) * T, j * T : (j + 1) * T] = self.entries[i][
                    j
                ].dense()
        return out

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.structure != other.structure or self.n != other.n:
            raise StructureMismatchError("mixed operator matrix shapes")
        return OperatorMatrix(
            self.structure,
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ],
        )


def is_positive(m, tol: float = DEFAULT_POS_TOL, hermitian_tol: float | None = None):
    """Positive semidefiniteness with tolerance.

    Accepts an :class:`OperatorMatrix` or a dense complex array.  The matrix
    is symmetrized when its Hermitian deviation (largest entry of M - M*) is
    within ``hermitian_tol`` (default: same as ``tol``) and rejected with
    ``NotHermitianError`` otherwise.  Returns ``(ok, lambda_min)`` where the
    test is lambda_min >= -tol * (1 + ||M||).
    """
    if isinstance(m, OperatorMatrix):
        m = m.flatten()
    m = np.asarray(m, dtype=np.complex128)
    if hermitian_tol is None:
        hermitian_tol = tol
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > hermitian_tol:
        raise NotHermitianError(
            "matrix is not Hermitian within tolerance", deviation=dev, tol=hermitian_tol
        )
    h = (m + m.conj().T) / 2.0
    if h.size == 0:
        return True, 0.0
    eigs = np.linalg.eigvalsh(h)
    lam_min = float(eigs[0])
    scale = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    return lam_min >= -tol * (1.0 + scale), lam_min


def tensor_algebra(s1: BlockStructure, s2: BlockStructure):
    """Tensor product structure with the two canonical embeddings.

    Blocks are ordered (i, j) row-major over the factors; returns
    ``(structure, embed_left, embed_right)`` with embed_left(a) = a (x) 1 and
    embed_right(b) = 1 (x) b.
    """
    dims = []
    for d1 in s1.block_dims:
        for d2 in s2.block_dims:
            dims.append(d1 * d2)
    ts = BlockStructure(tuple(dims))

    def embed_left(a: AlgebraElement) -> AlgebraElement:
        if a.structure != s1:
            raise StructureMismatchError("element not in the left factor")
        blocks = []
        for b1 in a.blocks:
            for d2 in s2.block_dims:
                blocks.append(np.kron(b1, np.eye(d2)))
        return AlgebraElement(ts, blocks)

    def embed_right(b: AlgebraElement) -> AlgebraElement:
        if b.structure != s2:
            raise StructureMismatchError("element not in the right factor")
        blocks = []
        for d1 in s1.block_dims:
            for b2 in b.blocks:
                blocks.append(np.kron(np.eye(d1), b2))
        return AlgebraElement(ts, blocks)

    return ts, embed_left, embed_right
