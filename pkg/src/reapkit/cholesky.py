"""Left-looking sparse Cholesky with host-side symbolic analysis.

The host builds the elimination tree and the column patterns of L; the
numeric phase then fills a row-major L store whose per-row extents are
fixed in advance by the symbolic row counts.  No fill-reducing ordering is
applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix import INDEX_DTYPE, VALUE_DTYPE, CscMatrix, pattern_symmetric
from .oracle import NotPositiveDefiniteError

NONE = -1


@dataclass(frozen=True, eq=False)
class EliminationTree:
    parent: np.ndarray

    @property
    def n(self) -> int:
        return len(self.parent)

    def children(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for j, p in enumerate(self.parent.tolist()):
            if p != NONE:
                kids[p].append(j)
        return kids


@dataclass(frozen=True, eq=False)
class SymbolicPattern:
    """Structure of L: sorted row sets per column and the row-major layout."""

    n: int
    col_pointer: np.ndarray
    row_indices: np.ndarray
    row_counts: np.ndarray
    row_start: np.ndarray  # offset of each row in the row-major L store

    def column(self, k: int) -> np.ndarray:
        return self.row_indices[self.col_pointer[k] : self.col_pointer[k + 1]]

    @property
    def nnz(self) -> int:
        return int(self.col_pointer[-1])

    def row_extent(self, r: int) -> tuple[int, int]:
        """Inclusive (start, end) of row ``r`` in the L store."""
        s = int(self.row_start[r])
        return s, s + int(self.row_counts[r]) - 1


@dataclass(frozen=True, eq=False)
class LFactor:
    """Row-major lower-triangular factor; row ``r`` occupies ``row_pointer[r]:row_pointer[r+1]``."""

    n: int
    row_pointer: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def row(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.row_pointer[r], self.row_pointer[r + 1]
        return self.col_indices[lo:hi], self.values[lo:hi]

    def extents(self) -> np.ndarray:
        return np.stack([self.row_pointer[:-1], self.row_pointer[1:] - 1], axis=1)

    @property
    def nnz(self) -> int:
        return int(self.row_pointer[-1])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        r = np.repeat(np.arange(self.n), np.diff(self.row_pointer))
        out[r, self.col_indices] = self.values
        return out

    def to_csc(self) -> CscMatrix:
        r = np.repeat(np.arange(self.n), np.diff(self.row_pointer))
        order = np.lexsort((r, self.col_indices))
        ptr = np.zeros(self.n + 1, dtype=INDEX_DTYPE)
        np.cumsum(np.bincount(self.col_indices, minlength=self.n), out=ptr[1:])
        return CscMatrix(self.n, self.n, ptr, r[order], self.values[order])

    def __eq__(self, other) -> bool:
        if not isinstance(other, LFactor):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.row_pointer, other.row_pointer)
            and np.array_equal(self.col_indices, other.col_indices)
            and np.array_equal(self.values.view(np.uint32), other.values.view(np.uint32))
        )

    __hash__ = None


def _check_square_symmetric(a: CscMatrix) -> None:
    if a.rows != a.cols:
        raise ValueError(f"matrix must be square, got {a.rows}x{a.cols}")
    if not pattern_symmetric(a):
        raise ValueError("matrix must have a symmetric non-zero pattern")


def build_etree(a: CscMatrix) -> EliminationTree:
    """Liu's algorithm with path compression over the upper triangle."""
    _check_square_symmetric(a)
    n = a.cols
    parent = np.full(n, NONE, dtype=INDEX_DTYPE)
    ancestor = np.full(n, NONE, dtype=INDEX_DTYPE)
    ptr, rows = a.col_pointer, a.row_indices
    for k in range(n):
        for i in rows[ptr[k] : ptr[k + 1]].tolist():
            while i != NONE and i < k:
                nxt = ancestor[i]
                ancestor[i] = k
                if nxt == NONE:
                    parent[i] = k
                i = nxt
    return EliminationTree(parent)


def symbolic_pattern(a: CscMatrix, tree: EliminationTree) -> SymbolicPattern:
    """struct(L[:, k]) = lower(A)[:, k] | union of children's structures minus the child."""
    n = a.cols
    if tree.n != n:
        raise ValueError(f"tree has {tree.n} nodes but matrix has {n} columns")
    kids = tree.children()
    cols: list[np.ndarray] = []
    for k in range(n):
        rows, _ = a.column(k)
        parts = [rows[rows >= k], np.array([k], dtype=INDEX_DTYPE)]
        for j in kids[k]:
            cj = cols[j]
            parts.append(cj[cj != j])
        s = np.unique(np.concatenate(parts))
        if s[0] != k:
            raise ValueError(f"elimination tree inconsistent with matrix at column {k}")
        cols.append(s)
    ptr = np.zeros(n + 1, dtype=INDEX_DTYPE)
    np.cumsum([len(c) for c in cols], out=ptr[1:])
    idx = np.concatenate(cols) if cols else np.zeros(0, dtype=INDEX_DTYPE)
    counts = np.bincount(idx, minlength=n).astype(INDEX_DTYPE)
    start = np.zeros(n, dtype=INDEX_DTYPE)
    if n:
        np.cumsum(counts[:-1], out=start[1:])
    return SymbolicPattern(n, ptr, idx, counts, start)


def analyze(a: CscMatrix) -> tuple[EliminationTree, SymbolicPattern]:
    t = build_etree(a)
    return t, symbolic_pattern(a, t)


def _dot_matches(r_cols, r_vals, k_cols, k_vals, limit_col):
    r_end = np.searchsorted(r_cols, limit_col)
    k_end = np.searchsorted(k_cols, limit_col)
    if r_end == 0 or k_end == 0:
        return VALUE_DTYPE(0.0), 0
    _, ir, ik = np.intersect1d(r_cols[:r_end], k_cols[:k_end], assume_unique=True, return_indices=True)
    if len(ir) == 0:
        return VALUE_DTYPE(0.0), 0
    prod = np.asarray(r_vals, dtype=VALUE_DTYPE)[ir] * np.asarray(k_vals, dtype=VALUE_DTYPE)[ik]
    # cumsum is a strict left-to-right recurrence
    return np.cumsum(prod, dtype=VALUE_DTYPE)[-1], len(ir)


def sparse_dot(r_cols, r_vals, k_cols, k_vals, limit_col: int) -> np.float32:
    """Dot product over matching columns < ``limit_col``, accumulated in ascending column order."""
    r_cols, k_cols = np.asarray(r_cols), np.asarray(k_cols)
    return _dot_matches(r_cols, r_vals, k_cols, k_vals, limit_col)[0]


def _row_layout(p: SymbolicPattern) -> np.ndarray:
    """Column index of every slot in the row-major store."""
    col_of = np.repeat(np.arange(p.n, dtype=INDEX_DTYPE), np.diff(p.col_pointer))
    order = np.lexsort((col_of, p.row_indices))
    return col_of[order]


def factorize(a: CscMatrix, pattern: SymbolicPattern, *, on_column=None) -> LFactor:
    """Numeric left-looking factorization in float32.

    ``on_column(k, rows, row_lengths, matches)`` is called after each column
    with the rows of pattern(k), how many entries left of column k each of
    those rows held, and how many index matches each dot product found.
    The simulator uses it to cost the column without redoing the arithmetic.
    """
    n = a.cols
    if a.rows != n or pattern.n != n:
        raise ValueError("pattern does not match matrix")
    ptr = np.zeros(n + 1, dtype=INDEX_DTYPE)
    np.cumsum(pattern.row_counts, out=ptr[1:])
    cols = _row_layout(pattern)
    vals = np.zeros(len(cols), dtype=VALUE_DTYPE)
    filled = np.zeros(n, dtype=INDEX_DTYPE)  # row r holds its first filled[r] slots

    for k in range(n):
        rows_a, vals_a = a.column(k)
        lower = rows_a >= k
        dot = dict(zip(rows_a[lower].tolist(), vals_a[lower]))
        rl = pattern.column(k).tolist()
        k_lo = ptr[k]
        k_cols, k_vals = cols[k_lo : k_lo + filled[k]], vals[k_lo : k_lo + filled[k]]
        lengths = [int(filled[r]) for r in rl]
        matches = []
        for r, fr in zip(rl, lengths):
            lo = ptr[r]
            d, hits = _dot_matches(cols[lo : lo + fr], vals[lo : lo + fr], k_cols, k_vals, k)
            dot[r] = VALUE_DTYPE(dot.get(r, VALUE_DTYPE(0.0)) - d)
            matches.append(hits)
        pivot = dot[k]
        if not pivot > 0:
            raise NotPositiveDefiniteError(k, float(pivot))
        diag = np.sqrt(pivot, dtype=VALUE_DTYPE)
        for r in rl:
            slot = ptr[r] + filled[r]
            if cols[slot] != k:
                raise AssertionError(f"L store layout broken at row {r}, column {k}")
            vals[slot] = diag if r == k else VALUE_DTYPE(dot[r] / diag)
            filled[r] += 1
        if on_column is not None:
            on_column(k, rl, lengths, matches)
    return LFactor(n, ptr, cols, vals)


def cholesky(a: CscMatrix) -> LFactor:
    _, p = analyze(a)
    return factorize(a, p)


@dataclass(frozen=True)
class Residual:
    max_abs: float
    frobenius: float
    max_abs_a: float

    @property
    def relative(self) -> float:
        return self.max_abs / self.max_abs_a if self.max_abs_a else self.max_abs


def verify_factor(a: CscMatrix, l: LFactor) -> Residual:
    if a.rows != l.n or a.cols != l.n:
        raise ValueError(f"factor of order {l.n} does not match {a.rows}x{a.cols}")
    ld = l.to_dense()
    ad = a.to_dense()
    diff = ld @ ld.T - ad
    return Residual(float(np.abs(diff).max(initial=0.0)), float(np.linalg.norm(diff)), float(np.abs(ad).max(initial=0.0)))
