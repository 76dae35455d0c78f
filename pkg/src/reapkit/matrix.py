"""Sparse storage formats (COO, CSR, CSC) and conversions between them.

Values are always float32; indices are int64 in memory.  A matrix is
*canonical* when every row (CSR) or column (CSC) has strictly increasing
indices, which is what every kernel in this package assumes.  Explicit
zeros are kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VALUE_DTYPE = np.float32
INDEX_DTYPE = np.int64


def _as_index(a) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(a, dtype=INDEX_DTYPE).reshape(-1))


def _as_value(a) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(a, dtype=VALUE_DTYPE).reshape(-1))


def _bits_equal(x: np.ndarray, y: np.ndarray) -> bool:
    # bitwise compare so -0.0 != 0.0 and NaN payloads matter
    return x.shape == y.shape and np.array_equal(x.view(np.uint32), y.view(np.uint32))


def segment_sum_f32(values: np.ndarray, starts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Sum each run ``values[s:s+len]`` strictly left to right in float32.

    numpy's own reductions may use pairwise summation, which would make
    results depend on run length in a way hardware adders do not.
    """
    values = np.asarray(values, dtype=VALUE_DTYPE)
    acc = values[starts].copy()
    if len(lengths) == 0:
        return acc
    for offset in range(1, int(lengths.max())):
        live = lengths > offset
        idx = np.nonzero(live)[0]
        acc[idx] = acc[idx] + values[starts[idx] + offset]
    return acc


@dataclass(frozen=True, eq=False)
class CooMatrix:
    """Coordinate list; may contain duplicates until converted."""

    rows: int
    cols: int
    row: np.ndarray
    col: np.ndarray
    val: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row", _as_index(self.row))
        object.__setattr__(self, "col", _as_index(self.col))
        object.__setattr__(self, "val", _as_value(self.val))
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative dimension")
        if not (len(self.row) == len(self.col) == len(self.val)):
            raise ValueError("row/col/val length mismatch")
        if len(self.row):
            if self.row.min() < 0 or self.row.max() >= self.rows:
                raise ValueError("row index out of range")
            if self.col.min() < 0 or self.col.max() >= self.cols:
                raise ValueError("column index out of range")

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries) -> CooMatrix:
        entries = list(entries)
        if not entries:
            return cls(rows, cols, [], [], [])
        r, c, v = zip(*entries)
        return cls(rows, cols, r, c, v)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return len(self.val)

    def entries(self) -> list[tuple[int, int, float]]:
        return [(int(r), int(c), float(v)) for r, c, v in zip(self.row, self.col, self.val)]

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.float64)
        np.add.at(out, (self.row, self.col), self.val.astype(np.float64))
        return out


@dataclass(frozen=True, eq=False)
class CsrMatrix:
    rows: int
    cols: int
    row_pointer: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_pointer", _as_index(self.row_pointer))
        object.__setattr__(self, "col_indices", _as_index(self.col_indices))
        object.__setattr__(self, "values", _as_value(self.values))
        _check_compressed(self.rows, self.cols, self.row_pointer, self.col_indices, self.values)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return int(self.row_pointer[-1])

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.row_pointer[i], self.row_pointer[i + 1]
        return self.col_indices[lo:hi], self.values[lo:hi]

    def row_nnz(self) -> np.ndarray:
        return np.diff(self.row_pointer)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.float64)
        r = np.repeat(np.arange(self.rows), self.row_nnz())
        out[r, self.col_indices] = self.values
        return out

    def to_coo(self) -> CooMatrix:
        r = np.repeat(np.arange(self.rows), self.row_nnz())
        return CooMatrix(self.rows, self.cols, r, self.col_indices.copy(), self.values.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CsrMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.row_pointer, other.row_pointer)
            and np.array_equal(self.col_indices, other.col_indices)
            and _bits_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"CsrMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


@dataclass(frozen=True, eq=False)
class CscMatrix:
    rows: int
    cols: int
    col_pointer: np.ndarray
    row_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "col_pointer", _as_index(self.col_pointer))
        object.__setattr__(self, "row_indices", _as_index(self.row_indices))
        object.__setattr__(self, "values", _as_value(self.values))
        _check_compressed(self.cols, self.rows, self.col_pointer, self.row_indices, self.values)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return int(self.col_pointer[-1])

    def column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.col_pointer[j], self.col_pointer[j + 1]
        return self.row_indices[lo:hi], self.values[lo:hi]

    def col_nnz(self) -> np.ndarray:
        return np.diff(self.col_pointer)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.float64)
        c = np.repeat(np.arange(self.cols), self.col_nnz())
        out[self.row_indices, c] = self.values
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, CscMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.col_pointer, other.col_pointer)
            and np.array_equal(self.row_indices, other.row_indices)
            and _bits_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"CscMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


def _check_compressed(major, minor, ptr, idx, val):
    if major < 0 or minor < 0:
        raise ValueError("negative dimension")
    if len(ptr) != major + 1:
        raise ValueError(f"pointer array must have length {major + 1}, got {len(ptr)}")
    if ptr[0] != 0 or np.any(np.diff(ptr) < 0):
        raise ValueError("pointer array must start at 0 and be non-decreasing")
    if ptr[-1] != len(idx) or len(idx) != len(val):
        raise ValueError("pointer/index/value lengths disagree")
    if len(idx):
        if idx.min() < 0 or idx.max() >= minor:
            raise ValueError("index out of range")
        # strictly increasing inside each segment
        step = np.diff(idx)
        seg_start = np.zeros(len(idx), dtype=bool)
        seg_start[ptr[:-1][ptr[:-1] < len(idx)]] = True
        if np.any((step <= 0) & ~seg_start[1:]):
            raise ValueError("indices must be strictly increasing within each row/column")


def coo_to_csr(m: CooMatrix) -> CsrMatrix:
    """Canonical CSR; duplicate coordinates are summed in input order."""
    order = np.lexsort((m.col, m.row))  # stable: duplicates keep input order
    r, c, v = m.row[order], m.col[order], m.val[order]
    if len(r):
        new = np.ones(len(r), dtype=bool)
        new[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
        starts = np.nonzero(new)[0]
        lengths = np.diff(np.append(starts, len(r)))
        v = segment_sum_f32(v, starts, lengths)
        r, c = r[starts], c[starts]
    counts = np.bincount(r, minlength=m.rows) if len(r) else np.zeros(m.rows, dtype=INDEX_DTYPE)
    ptr = np.zeros(m.rows + 1, dtype=INDEX_DTYPE)
    np.cumsum(counts, out=ptr[1:])
    return CsrMatrix(m.rows, m.cols, ptr, c, v)


def csr_to_coo(m: CsrMatrix) -> CooMatrix:
    return m.to_coo()


def _transpose_compressed(major, minor, ptr, idx, val):
    major_idx = np.repeat(np.arange(major, dtype=INDEX_DTYPE), np.diff(ptr))
    order = np.argsort(idx, kind="stable")
    counts = np.bincount(idx, minlength=minor) if len(idx) else np.zeros(minor, dtype=INDEX_DTYPE)
    new_ptr = np.zeros(minor + 1, dtype=INDEX_DTYPE)
    np.cumsum(counts, out=new_ptr[1:])
    return new_ptr, major_idx[order], val[order]


def csr_to_csc(m: CsrMatrix) -> CscMatrix:
    ptr, idx, val = _transpose_compressed(m.rows, m.cols, m.row_pointer, m.col_indices, m.values)
    return CscMatrix(m.rows, m.cols, ptr, idx, val)


def csc_to_csr(m: CscMatrix) -> CsrMatrix:
    ptr, idx, val = _transpose_compressed(m.cols, m.rows, m.col_pointer, m.row_indices, m.values)
    return CsrMatrix(m.rows, m.cols, ptr, idx, val)


def transpose(m: CsrMatrix) -> CsrMatrix:
    ptr, idx, val = _transpose_compressed(m.rows, m.cols, m.row_pointer, m.col_indices, m.values)
    return CsrMatrix(m.cols, m.rows, ptr, idx, val)


def density(m: CsrMatrix | CscMatrix | CooMatrix) -> float:
    total = m.rows * m.cols
    if total == 0:
        raise ValueError("density is undefined for a zero-dimension matrix")
    return m.nnz / total


def csr_from_dense(a, keep_zeros: bool = False) -> CsrMatrix:
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError("expected a 2-D array")
    mask = np.ones(a.shape, dtype=bool) if keep_zeros else a != 0
    r, c = np.nonzero(mask)
    return coo_to_csr(CooMatrix(a.shape[0], a.shape[1], r, c, a[r, c]))


def identity(n: int) -> CsrMatrix:
    return CsrMatrix(n, n, np.arange(n + 1), np.arange(n), np.ones(n, dtype=VALUE_DTYPE))


def zeros(rows: int, cols: int) -> CsrMatrix:
    return CsrMatrix(rows, cols, np.zeros(rows + 1, dtype=INDEX_DTYPE), [], [])


def pattern_symmetric(m: CsrMatrix | CscMatrix) -> bool:
    if m.rows != m.cols:
        return False
    csr = m if isinstance(m, CsrMatrix) else csc_to_csr(m)
    t = transpose(csr)
    return np.array_equal(csr.row_pointer, t.row_pointer) and np.array_equal(
        csr.col_indices, t.col_indices
    )
