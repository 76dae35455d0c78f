"""Row-by-row SpGEMM following the accelerator dataflow.

For each row of A the row's bundles are loaded into a CAM keyed by column
index; the B rows named by those columns are streamed past it and every hit
multiplies the A value into each element of the B row.  The resulting
partial products are stably sorted by output column and merged by summing
equal-column runs left to right.  All arithmetic is float32 and the order
is fixed, so results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .matrix import INDEX_DTYPE, VALUE_DTYPE, CsrMatrix, segment_sum_f32
from .rir import DEFAULT_CAPACITY, RirBundle, split_row


class CamOverflowError(RuntimeError):
    pass


class PartialProduct(NamedTuple):
    col: int
    val: float


@dataclass(frozen=True, eq=False)
class Partials:
    """A batch of partial products stored as parallel arrays."""

    cols: np.ndarray
    vals: np.ndarray

    @classmethod
    def empty(cls) -> Partials:
        return cls(np.zeros(0, dtype=INDEX_DTYPE), np.zeros(0, dtype=VALUE_DTYPE))

    @classmethod
    def of(cls, items: Iterable) -> Partials:
        items = list(items)
        if not items:
            return cls.empty()
        c, v = zip(*items)
        return cls(np.asarray(c, dtype=INDEX_DTYPE), np.asarray(v, dtype=VALUE_DTYPE))

    @classmethod
    def concat(cls, parts: list[Partials]) -> Partials:
        if not parts:
            return cls.empty()
        return cls(np.concatenate([p.cols for p in parts]), np.concatenate([p.vals for p in parts]))

    def __len__(self) -> int:
        return len(self.cols)

    def __iter__(self):
        return (PartialProduct(int(c), float(v)) for c, v in zip(self.cols, self.vals))

    def tolist(self) -> list[PartialProduct]:
        return list(self)


def _partials(ps) -> Partials:
    return ps if isinstance(ps, Partials) else Partials.of(ps)


class CamTable:
    """Key -> (A value, A row) store with a hard capacity."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        self.capacity = capacity
        self._entries: dict[int, tuple[np.float32, int]] = {}

    def load(self, bundle: RirBundle) -> None:
        if len(bundle) > self.capacity:
            raise CamOverflowError(f"bundle of {len(bundle)} elements does not fit CAM of {self.capacity}")
        self._entries = {
            int(k): (v, bundle.shared) for k, v in zip(bundle.indices.tolist(), bundle.values)
        }

    def lookup(self, key: int):
        return self._entries.get(key)

    @property
    def fill(self) -> int:
        return len(self._entries)

    def keys(self) -> list[int]:
        return list(self._entries)


def match_multiply(cam: CamTable, b_bundles: Iterable[RirBundle]) -> Partials:
    """Stream B bundles past a loaded CAM; each hit multiplies into the whole bundle."""
    out = []
    for b in b_bundles:
        hit = cam.lookup(b.shared)
        if hit is not None:
            out.append(Partials(b.indices.astype(INDEX_DTYPE), hit[0] * b.values))
    return Partials.concat(out)


def sort_partials(ps) -> Partials:
    ps = _partials(ps)
    order = np.argsort(ps.cols, kind="stable")
    return Partials(ps.cols[order], ps.vals[order])


def merge_partials(ps) -> Partials:
    ps = _partials(ps)
    if len(ps) == 0:
        return ps
    step = np.diff(ps.cols)
    if np.any(step < 0):
        raise ValueError("merge_partials needs input sorted by column")
    starts = np.concatenate([[0], np.nonzero(step)[0] + 1])
    lengths = np.diff(np.append(starts, len(ps)))
    return Partials(ps.cols[starts], segment_sum_f32(ps.vals, starts, lengths))


@dataclass
class SpgemmStats:
    partials: int = 0
    merges: int = 0
    explicit_zeros: int = 0
    cam_loads: int = 0

    @property
    def flops(self) -> int:
        # one multiply per partial product, one add per merge accumulation
        return self.partials + self.merges


def row_product(
    a_bundles: list[RirBundle], b: CsrMatrix, capacity: int, cache: dict | None = None
) -> tuple[Partials, int]:
    """Compute one output row from its A bundles; returns merged row and partial count."""
    cam = CamTable(capacity)
    parts = []
    for ab in a_bundles:
        cam.load(ab)
        stream = []
        for j in ab.indices.tolist():  # scheduled B rows, ascending
            if cache is not None and j in cache:
                stream.extend(cache[j])
                continue
            cols, vals = b.row(j)
            bl = split_row(j, cols, vals, capacity)
            if cache is not None:
                cache[j] = bl
            stream.extend(bl)
        parts.append(match_multiply(cam, stream))
    ps = Partials.concat(parts)
    return merge_partials(sort_partials(ps)), len(ps)


def spgemm(
    a: CsrMatrix, b: CsrMatrix, capacity: int = DEFAULT_CAPACITY, stats: SpgemmStats | None = None
) -> CsrMatrix:
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    cache: dict[int, list[RirBundle]] = {}
    ptr = np.zeros(a.rows + 1, dtype=INDEX_DTYPE)
    cols, vals = [], []
    st = stats if stats is not None else SpgemmStats()
    for i in range(a.rows):
        ac, av = a.row(i)
        if len(ac) == 0:
            ptr[i + 1] = ptr[i]
            continue
        bundles = split_row(i, ac, av, capacity)
        merged, n_partials = row_product(bundles, b, capacity, cache)
        st.partials += n_partials
        st.merges += n_partials - len(merged)
        st.explicit_zeros += int(np.count_nonzero(merged.vals == 0))
        st.cam_loads += len(bundles)
        cols.append(merged.cols)
        vals.append(merged.vals)
        ptr[i + 1] = ptr[i] + len(merged)
    return CsrMatrix(
        a.rows,
        b.cols,
        ptr,
        np.concatenate(cols) if cols else [],
        np.concatenate(vals) if vals else [],
    )


def partial_count(a: CsrMatrix, b: CsrMatrix) -> np.ndarray:
    """Per-row partial products: sum of nnz(B row j) over the non-zeros a[i, j]."""
    per_entry = b.row_nnz()[a.col_indices]
    out = np.zeros(a.rows, dtype=INDEX_DTYPE)
    np.add.at(out, np.repeat(np.arange(a.rows), a.row_nnz()), per_entry)
    return out


def reference_spgemm(a: CsrMatrix, b: CsrMatrix) -> CsrMatrix:
    """Hash-accumulator (Gustavson) product with float64 accumulators.

    Every structurally reachable column is kept, even if it sums to zero.
    Values are rounded to float32 once at the end.
    """
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    ptr = [0]
    cols, vals = [], []
    for i in range(a.rows):
        acc: dict[int, float] = {}
        ac, av = a.row(i)
        for j, x in zip(ac.tolist(), av.tolist()):
            bc, bv = b.row(j)
            for c, y in zip(bc.tolist(), bv.tolist()):
                acc[c] = acc.get(c, 0.0) + x * y
        keys = sorted(acc)
        cols.extend(keys)
        vals.extend(acc[c] for c in keys)
        ptr.append(len(cols))
    return CsrMatrix(a.rows, b.cols, ptr, cols, np.asarray(vals, dtype=np.float64).astype(VALUE_DTYPE))
