"""Bit-packed matrices over GF(2): rank, solve, nullspace."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend

WORD = 64


def n_words(ncols: int) -> int:
    return max(1, (ncols + WORD - 1) // WORD)


def pack_rows(dense: np.ndarray) -> np.ndarray:
    """Pack a 2D 0/1 array into little-endian uint64 words, 64 columns per word."""
    dense = np.asarray(dense, dtype=np.uint8) & 1
    if dense.ndim != 2:
        raise ValueError("expected a 2D array")
    nrows, ncols = dense.shape
    nw = n_words(ncols)
    padded = np.zeros((nrows, nw * WORD), dtype=np.uint8)
    padded[:, :ncols] = dense
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False).reshape(nrows, nw)


def unpack_rows(words: np.ndarray, ncols: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint64)
    as_bytes = words.astype("<u8", copy=False).view(np.uint8).reshape(words.shape[0], -1)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :ncols]


def pack_vector(bits: np.ndarray) -> np.ndarray:
    return pack_rows(np.asarray(bits).reshape(1, -1))[0]


class BitMatrix:
    """Dense GF(2) matrix stored as packed uint64 rows.

    Instances are treated as immutable; every operation returns new storage.
    """

    __slots__ = ("_words", "nrows", "ncols")

    def __init__(self, words: np.ndarray, ncols: int):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.ndim != 2 or words.shape[1] != n_words(ncols):
            raise ValueError(f"word array of shape {words.shape} does not fit {ncols} columns")
        self._words = words
        self._words.flags.writeable = False
        self.nrows = words.shape[0]
        self.ncols = ncols

    @classmethod
    def from_dense(cls, dense) -> BitMatrix:
        dense = np.asarray(dense)
        if dense.ndim == 1:
            dense = dense.reshape(1, -1)
        return cls(pack_rows(dense), dense.shape[1])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> BitMatrix:
        return cls(np.zeros((nrows, n_words(ncols)), dtype=np.uint64), ncols)

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def words(self) -> np.ndarray:
        return self._words

    def to_dense(self) -> np.ndarray:
        return unpack_rows(self._words, self.ncols)

    def row(self, i: int) -> np.ndarray:
        return unpack_rows(self._words[i : i + 1], self.ncols)[0]

    def columns(self, cols) -> BitMatrix:
        return BitMatrix.from_dense(self.to_dense()[:, np.asarray(cols, dtype=np.intp)])

    def rows(self, idx) -> BitMatrix:
        return BitMatrix(self._words[np.asarray(idx, dtype=np.intp)], self.ncols)

    @property
    def T(self) -> BitMatrix:
        return BitMatrix.from_dense(self.to_dense().T)

    def hstack(self, other: BitMatrix) -> BitMatrix:
        if other.nrows != self.nrows:
            raise ValueError("row count mismatch in hstack")
        return BitMatrix.from_dense(np.hstack([self.to_dense(), other.to_dense()]))

    def vstack(self, other: BitMatrix) -> BitMatrix:
        if other.ncols != self.ncols:
            raise ValueError("column count mismatch in vstack")
        return BitMatrix(np.vstack([self._words, other._words]), self.ncols)

    def matvec(self, x) -> np.ndarray:
        """M @ x over GF(2); ``x`` is a 0/1 vector of length ncols."""
        x = np.asarray(x)
        if x.shape != (self.ncols,):
            raise ValueError(f"vector of length {x.shape} does not match {self.ncols} columns")
        xw = pack_vector(x)
        return (np.bitwise_count(self._words & xw).sum(axis=1) & 1).astype(np.uint8)

    def __matmul__(self, other):
        if isinstance(other, BitMatrix):
            if other.nrows != self.ncols:
                raise ValueError("inner dimension mismatch")
            prod = self.to_dense().astype(np.int64) @ other.to_dense().astype(np.int64)
            return BitMatrix.from_dense(prod & 1)
        return self.matvec(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._words, other._words)

    def __hash__(self):
        return hash((self.shape, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.nrows}x{self.ncols})"

    def echelon(self, reduced: bool = True) -> tuple[BitMatrix, np.ndarray]:
        work = self._words.copy()
        pivots = backend.echelon_inplace(work, self.ncols, reduced)
        return BitMatrix(work, self.ncols), pivots

    def rank(self) -> int:
        work = self._words.copy()
        return len(backend.echelon_inplace(work, self.ncols, False))


def rank(m: BitMatrix) -> int:
    return m.rank()


@dataclass(frozen=True)
class SolveResult:
    """Outcome of M x = b.

    ``witness`` is set iff ``feasible``; otherwise ``augmented_rank`` is
    ``rank + 1`` and certifies that b lies outside the column space.
    """

    feasible: bool
    witness: np.ndarray | None
    rank: int
    augmented_rank: int


class LinearSolver:
    """Factor M once (E M = R in reduced echelon form) and solve many right-hand sides."""

    def __init__(self, m: BitMatrix):
        self.matrix = m
        nrows, ncols = m.shape
        dense = np.hstack([m.to_dense(), np.eye(nrows, dtype=np.uint8)])
        work = pack_rows(dense)
        self.pivots = backend.echelon_inplace(work, ncols, True)
        self.rank = len(self.pivots)
        full = unpack_rows(work, ncols + nrows)
        self._transform = pack_rows(full[:, ncols:])
        self._reduced = full[: self.rank, :ncols]

    def solve(self, b) -> SolveResult:
        b = np.asarray(b, dtype=np.uint8) & 1
        if b.shape != (self.matrix.nrows,):
            raise ValueError(f"right-hand side of length {b.shape} does not match {self.matrix.nrows} rows")
        return self._solve_packed(pack_vector(b))

    def solve_support(self, ones) -> SolveResult:
        """Solve with the right-hand side given by the indices of its set bits."""
        b = np.zeros(self.matrix.nrows, dtype=np.uint8)
        for i in ones:
            b[i] ^= 1
        return self._solve_packed(pack_vector(b))

    def _solve_packed(self, bw: np.ndarray) -> SolveResult:
        t = (np.bitwise_count(self._transform & bw).sum(axis=1) & 1).astype(np.uint8)
        if t[self.rank :].any():
            return SolveResult(False, None, self.rank, self.rank + 1)
        x = np.zeros(self.matrix.ncols, dtype=np.uint8)
        x[self.pivots] = t[: self.rank]
        return SolveResult(True, x, self.rank, self.rank)

    def nullspace(self) -> BitMatrix:
        ncols = self.matrix.ncols
        free = np.setdiff1d(np.arange(ncols), self.pivots)
        basis = np.zeros((len(free), ncols), dtype=np.uint8)
        basis[np.arange(len(free)), free] = 1
        if self.rank:
            basis[:, self.pivots] = self._reduced[:, free].T
        return BitMatrix.from_dense(basis) if len(free) else BitMatrix.zeros(0, ncols)


def solve(m: BitMatrix, b) -> SolveResult:
    """Solve M x = b exactly over GF(2)."""
    b = np.asarray(b, dtype=np.uint8) & 1
    if b.shape != (m.nrows,):
        raise ValueError(f"right-hand side of length {b.shape} does not match {m.nrows} rows")
    aug = pack_rows(np.hstack([m.to_dense(), b.reshape(-1, 1)]))
    pivots = backend.echelon_inplace(aug, m.ncols, True)
    r = len(pivots)
    last = unpack_rows(aug, m.ncols + 1)[:, m.ncols]
    if last[r:].any():
        return SolveResult(False, None, r, r + 1)
    x = np.zeros(m.ncols, dtype=np.uint8)
    x[pivots] = last[:r]
    return SolveResult(True, x, r, r)


def nullspace(m: BitMatrix) -> BitMatrix:
    return LinearSolver(m).nullspace()


def independent_rows(m: BitMatrix) -> np.ndarray:
    """Indices of the first maximal set of linearly independent rows, in order."""
    work = pack_rows(m.to_dense().T)
    return backend.echelon_inplace(work, m.nrows, False)
