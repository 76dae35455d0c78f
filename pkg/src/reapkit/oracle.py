"""Dense float64 reference computations used to check the sparse kernels."""

from __future__ import annotations

import numpy as np


class NotPositiveDefiniteError(ValueError):
    """Raised when a Cholesky pivot is not strictly positive."""

    def __init__(self, column: int, pivot: float):
        self.column = column
        self.pivot = pivot
        super().__init__(f"matrix is not positive definite at column {column} (pivot {pivot:g})")


def _as_dense(a) -> np.ndarray:
    if hasattr(a, "to_dense"):
        a = a.to_dense()
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return a


def dense_spgemm_oracle(a, b) -> np.ndarray:
    a, b = _as_dense(a), _as_dense(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    out = np.zeros((a.shape[0], b.shape[1]))
    # accumulate rank-1 updates over the inner index in f64
    for k in range(a.shape[1]):
        col = a[:, k]
        nz = np.nonzero(col)[0]
        if len(nz):
            out[nz] += np.outer(col[nz], b[k])
    return out


def dense_cholesky_oracle(a) -> np.ndarray:
    """Column-by-column textbook LL^T in float64."""
    a = _as_dense(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix must be symmetric")
    L = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - L[j, :j] @ L[j, :j]
        if not d > 0.0:
            raise NotPositiveDefiniteError(j, float(d))
        L[j, j] = np.sqrt(d)
        L[j + 1 :, j] = (a[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def max_violation(result, expected, rtol: float = 1e-5, atol: float = 1e-6) -> tuple[bool, float]:
    """Per-entry check ``|r - e| <= atol + rtol * |e|``; returns (ok, max |r - e|)."""
    r, e = _as_dense(result), _as_dense(expected)
    if r.shape != e.shape:
        raise ValueError(f"shape mismatch: {r.shape} vs {e.shape}")
    diff = np.abs(r - e)
    ok = bool(np.all(diff <= atol + rtol * np.abs(e)))
    return ok, float(diff.max(initial=0.0))
