"""Deterministic random test matrices."""

from __future__ import annotations

import numpy as np

from .matrix import VALUE_DTYPE, CooMatrix, CsrMatrix, coo_to_csr, transpose


def random_sparse(rows: int, cols: int, density: float, seed: int = 0) -> CsrMatrix:
    """Uniformly placed non-zeros with values drawn from [-1, 1).

    Exactly ``round(density * rows * cols)`` positions are chosen (at least
    one when the matrix is non-empty), without replacement.
    """
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must be in (0, 1], got {density}")
    total = rows * cols
    nnz = min(total, max(1, int(round(density * total)))) if total else 0
    rng = np.random.default_rng(seed)
    flat = np.sort(rng.choice(total, size=nnz, replace=False)) if nnz < total else np.arange(total)
    vals = rng.uniform(-1.0, 1.0, size=nnz).astype(VALUE_DTYPE)
    return coo_to_csr(CooMatrix(rows, cols, flat // cols, flat % cols, vals))


def banded(n: int, bandwidth: int, seed: int = 0, fill: float = 1.0) -> CsrMatrix:
    """Random matrix supported on ``|i - j| <= bandwidth``, each in-band slot kept with probability ``fill``."""
    rng = np.random.default_rng(seed)
    r, c = [], []
    for off in range(-bandwidth, bandwidth + 1):
        i = np.arange(max(0, -off), min(n, n - off))
        r.append(i)
        c.append(i + off)
    r, c = np.concatenate(r), np.concatenate(c)
    keep = rng.random(len(r)) < fill
    r, c = r[keep], c[keep]
    vals = rng.uniform(-1.0, 1.0, size=len(r)).astype(VALUE_DTYPE)
    return coo_to_csr(CooMatrix(n, n, r, c, vals))


def grid_laplacian(nx: int, ny: int | None = None) -> CsrMatrix:
    """5-point Laplacian on an nx-by-ny grid (SPD)."""
    ny = nx if ny is None else ny
    n = nx * ny
    idx = np.arange(n).reshape(ny, nx)
    r = [idx.ravel()]
    c = [idx.ravel()]
    v = [np.full(n, 4.0)]
    for a, b in ((idx[:, :-1], idx[:, 1:]), (idx[:-1, :], idx[1:, :])):
        a, b = a.ravel(), b.ravel()
        r += [a, b]
        c += [b, a]
        v += [np.full(len(a), -1.0), np.full(len(a), -1.0)]
    return coo_to_csr(CooMatrix(n, n, np.concatenate(r), np.concatenate(c), np.concatenate(v)))


def make_spd(m: CsrMatrix) -> CsrMatrix:
    """Symmetrize and shift the diagonal until the result is strictly diagonally dominant.

    The pattern of the result is pattern(m) | pattern(m^T) | diagonal.  The
    shift is zero when the symmetric part already dominates by a margin of 1.
    """
    if m.rows != m.cols:
        raise ValueError(f"make_spd needs a square matrix, got {m.rows}x{m.cols}")
    n = m.rows
    t = transpose(m)
    half = VALUE_DTYPE(0.5)
    diag = np.arange(n)
    coo = CooMatrix(
        n,
        n,
        np.concatenate([m.to_coo().row, t.to_coo().row, diag]),
        np.concatenate([m.col_indices, t.col_indices, diag]),
        np.concatenate([m.values * half, t.values * half, np.zeros(n, dtype=VALUE_DTYPE)]),
    )
    s = coo_to_csr(coo)
    rows = np.repeat(np.arange(n), s.row_nnz())
    on_diag = rows == s.col_indices
    radius = np.zeros(n)
    np.add.at(radius, rows[~on_diag], np.abs(s.values[~on_diag].astype(np.float64)))
    d = np.zeros(n)
    d[rows[on_diag]] = s.values[on_diag]
    shift = max(0.0, float(np.max(radius - d)) + 1.0) if n else 0.0
    vals = s.values.copy()
    vals[on_diag] = (d[rows[on_diag]] + shift).astype(VALUE_DTYPE)
    return CsrMatrix(n, n, s.row_pointer, s.col_indices, vals)
