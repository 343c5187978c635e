"""Sparse binary matrices and the GF(2) linear algebra around them.

Matrices are stored row-major as sorted column-index tuples. Vectors are plain
``numpy.uint8`` arrays of 0/1 entries; :func:`support` and :func:`from_support`
convert to and from the sorted-position form.

Rank and row-space queries pack rows into Python integers and eliminate on
those bitsets, which is fast enough for the block lengths used here (a few
thousand columns at most).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


def support(v: np.ndarray) -> list[int]:
    """Sorted positions holding 1."""
    return np.flatnonzero(np.asarray(v)).tolist()


def from_support(length: int, positions: Iterable[int]) -> np.ndarray:
    v = np.zeros(length, dtype=np.uint8)
    for p in positions:
        if not 0 <= p < length:
            raise DimensionError(f"position {p} outside vector of length {length}")
        v[p] = 1
    return v


def as_bits(v, length: int | None = None) -> np.ndarray:
    """Coerce ``v`` to a 0/1 uint8 vector, optionally checking its length."""
    arr = np.asarray(v, dtype=np.uint8) & 1
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-d vector, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise DimensionError(f"vector length {arr.shape[0]} != expected {length}")
    return arr


@dataclass(frozen=True, eq=False)
class SparseBinaryMatrix:
    """An ``num_rows x num_cols`` matrix over GF(2).

    ``rows[i]`` is the strictly increasing tuple of columns holding a 1 in row
    ``i``. Duplicate rows are allowed; duplicate entries within a row are not.
    """

    num_rows: int
    num_cols: int
    rows: tuple[tuple[int, ...], ...] = field(repr=False)

    def __post_init__(self):
        if len(self.rows) != self.num_rows:
            raise DimensionError(f"{len(self.rows)} rows given, num_rows={self.num_rows}")
        for i, row in enumerate(self.rows):
            prev = -1
            for j in row:
                if j <= prev:
                    raise ValueError(f"row {i} is not strictly increasing: {row}")
                prev = j
            if row and not (0 <= row[0] and row[-1] < self.num_cols):
                raise ValueError(f"row {i} has a column outside [0, {self.num_cols})")

    @classmethod
    def from_rows(cls, rows: Sequence[Iterable[int]], num_cols: int) -> "SparseBinaryMatrix":
        return cls(len(rows), num_cols, tuple(tuple(sorted(r)) for r in rows))

    @classmethod
    def from_dense(cls, dense) -> "SparseBinaryMatrix":
        a = np.asarray(dense, dtype=np.uint8) & 1
        if a.ndim != 2:
            raise DimensionError(f"expected a 2-d array, got shape {a.shape}")
        return cls(a.shape[0], a.shape[1], tuple(tuple(np.flatnonzero(r).tolist()) for r in a))

    @classmethod
    def identity(cls, n: int) -> "SparseBinaryMatrix":
        return cls(n, n, tuple((i,) for i in range(n)))

    @classmethod
    def zeros(cls, num_rows: int, num_cols: int) -> "SparseBinaryMatrix":
        return cls(num_rows, num_cols, ((),) * num_rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.num_rows, self.num_cols)

    @property
    def nnz(self) -> int:
        return self.csr[0][-1].item()

    def to_dense(self) -> np.ndarray:
        a = np.zeros(self.shape, dtype=np.uint8)
        for i, row in enumerate(self.rows):
            a[i, list(row)] = 1
        return a

    def transpose(self) -> "SparseBinaryMatrix":
        cols: list[list[int]] = [[] for _ in range(self.num_cols)]
        for i, row in enumerate(self.rows):
            for j in row:
                cols[j].append(i)
        return SparseBinaryMatrix(self.num_cols, self.num_rows, tuple(map(tuple, cols)))

    @property
    def T(self) -> "SparseBinaryMatrix":
        return self.transpose()

    def row_weights(self) -> list[int]:
        return [len(r) for r in self.rows]

    def select_rows(self, indices: Iterable[int]) -> "SparseBinaryMatrix":
        picked = tuple(self.rows[i] for i in indices)
        return SparseBinaryMatrix(len(picked), self.num_cols, picked)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` int32 arrays in CSR layout."""
        indptr = np.zeros(self.num_rows + 1, dtype=np.int32)
        np.cumsum([len(r) for r in self.rows], out=indptr[1:])
        indices = np.fromiter((j for r in self.rows for j in r), dtype=np.int32, count=int(indptr[-1]))
        return indptr, indices

    @cached_property
    def packed_rows(self) -> tuple[int, ...]:
        """Each row as a Python-int bitset (bit ``j`` set iff entry ``j`` is 1)."""
        return tuple(sum(1 << j for j in r) for r in self.rows)

    def __eq__(self, other):
        if not isinstance(other, SparseBinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash((self.num_rows, self.num_cols, self.rows))

    def __matmul__(self, v):
        return mat_vec_mod2(self, v)


def mat_vec_mod2(M: SparseBinaryMatrix, v) -> np.ndarray:
    """Syndrome-style product ``M v`` over GF(2)."""
    v = as_bits(v)
    if v.shape[0] != M.num_cols:
        raise DimensionError(f"matrix has {M.num_cols} columns, vector has length {v.shape[0]}")
    indptr, indices = M.csr
    running = np.zeros(indices.size + 1, dtype=np.int64)
    np.cumsum(v[indices], out=running[1:])
    return ((running[indptr[1:]] - running[indptr[:-1]]) & 1).astype(np.uint8)


def mat_mat_mod2(A: SparseBinaryMatrix, B: SparseBinaryMatrix) -> np.ndarray:
    """Dense GF(2) product ``A B`` as a uint8 array."""
    if A.num_cols != B.num_rows:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    return (A.to_dense().astype(np.int64) @ B.to_dense().astype(np.int64) % 2).astype(np.uint8)


def _echelon(packed: Iterable[int]) -> dict[int, int]:
    """Reduce bitset rows to a pivot -> row map (pivot = highest set bit)."""
    basis: dict[int, int] = {}
    for r in packed:
        while r:
            top = r.bit_length() - 1
            b = basis.get(top)
            if b is None:
                basis[top] = r
                break
            r ^= b
    return basis


def rank_mod2(M: SparseBinaryMatrix) -> int:
    return len(_echelon(M.packed_rows))


class RowSpace:
    """Reusable membership test for the row space of a fixed matrix."""

    def __init__(self, M: SparseBinaryMatrix):
        self.num_cols = M.num_cols
        self._basis = _echelon(M.packed_rows)

    @property
    def rank(self) -> int:
        return len(self._basis)

    def contains(self, v) -> bool:
        v = as_bits(v)
        if v.shape[0] != self.num_cols:
            raise DimensionError(f"row space has {self.num_cols} columns, vector has length {v.shape[0]}")
        r = _pack(v)
        basis = self._basis
        while r:
            b = basis.get(r.bit_length() - 1)
            if b is None:
                return False
            r ^= b
        return True


def _pack(v: np.ndarray) -> int:
    # little-endian bit order so bit j of the int is v[j]
    return int.from_bytes(np.packbits(v, bitorder="little").tobytes(), "little")


def in_row_space(M: SparseBinaryMatrix, v) -> bool:
    return RowSpace(M).contains(v)


def vertical_stack(top: SparseBinaryMatrix, bottom: SparseBinaryMatrix) -> SparseBinaryMatrix:
    if top.num_cols != bottom.num_cols:
        raise DimensionError(f"column counts differ: {top.num_cols} vs {bottom.num_cols}")
    return SparseBinaryMatrix(top.num_rows + bottom.num_rows, top.num_cols, top.rows + bottom.rows)


# ---------------------------------------------------------------------------
# File formats


def write_alist(M: SparseBinaryMatrix, path: str | Path) -> None:
    """Write ``M`` in alist format (first line is ``n m``, i.e. columns first)."""
    cols = M.transpose().rows
    col_w = [len(c) for c in cols]
    row_w = [len(r) for r in M.rows]
    lines = [
        f"{M.num_cols} {M.num_rows}",
        f"{max(col_w, default=0)} {max(row_w, default=0)}",
        " ".join(map(str, col_w)),
        " ".join(map(str, row_w)),
    ]
    lines += [" ".join(str(i + 1) for i in c) for c in cols]
    lines += [" ".join(str(j + 1) for j in r) for r in M.rows]
    Path(path).write_text("\n".join(lines) + "\n")


def read_alist(path: str | Path) -> SparseBinaryMatrix:
    """Read an alist file. Zero padding in adjacency lines is ignored."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        nums = [[int(x) for x in ln] for ln in lines]
    except ValueError as exc:
        raise ValueError(f"{path}: non-integer token in alist file") from exc
    if len(nums) < 4 or len(nums[0]) != 2:
        raise ValueError(f"{path}: malformed alist header")
    n, m = nums[0]
    if len(nums) < 4 + n + m:
        raise ValueError(f"{path}: expected {4 + n + m} lines, found {len(nums)}")
    col_w, row_w = nums[2], nums[3]
    col_lists = [[x - 1 for x in ln if x > 0] for ln in nums[4:4 + n]]
    row_lists = [[x - 1 for x in ln if x > 0] for ln in nums[4 + n:4 + n + m]]
    if [len(r) for r in row_lists] != row_w or [len(c) for c in col_lists] != col_w:
        raise ValueError(f"{path}: adjacency lists disagree with degree lists")
    M = SparseBinaryMatrix.from_rows(row_lists, n)
    if M.transpose().rows != tuple(tuple(sorted(c)) for c in col_lists):
        raise ValueError(f"{path}: row and column adjacency lists are inconsistent")
    return M


def read_dense_text(path: str | Path) -> SparseBinaryMatrix:
    """One matrix row per line, entries 0/1 separated by whitespace."""
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows")
    try:
        dense = np.array([[int(x) for x in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: non-integer entry") from exc
    if not np.isin(dense, (0, 1)).all():
        raise ValueError(f"{path}: entries must be 0 or 1")
    return SparseBinaryMatrix.from_dense(dense)


def write_dense_text(M: SparseBinaryMatrix, path: str | Path) -> None:
    Path(path).write_text("\n".join(" ".join(map(str, r)) for r in M.to_dense()) + "\n")


def load_matrix(path: str | Path) -> SparseBinaryMatrix:
    """Load by extension: ``.alist`` or dense text otherwise."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"matrix file not found: {path}")
    if path.suffix == ".alist":
        return read_alist(path)
    return read_dense_text(path)
