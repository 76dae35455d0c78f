"""RIR bundles: regular, capacity-bounded packets built on the host.

A data bundle carries one *shared* feature (a row index for CSR input, a
column index for CSC input) and up to ``capacity`` distinct
``(index, value)`` pairs.  A logical row longer than the capacity is split
over several bundles and only the final one has ``last`` set.  Schedule
bundles carry ``(row, start, end)`` triples instead of values; they tell
the Cholesky datapath where each row of L lives.

Wire format (little-endian)::

    header   b"RIR1" | version u16 | kernel u16 | capacity u32 | reserved u32
    record   elements... | shared u32 | meta u32

A data element is ``index u32, value f32``; a schedule element is
``row u32, start u32, end u32``.  The meta word packs the element count in
bits 0-15, the last flag in bit 16 and the kind in bits 17-18.  Records are
written elements-first and decoded from the tail backwards, which is the
order a bundle FIFO reader sees them.  The first record of every stream is
a SHAPE record holding the matrix dimensions.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field

import numpy as np

from .matrix import INDEX_DTYPE, VALUE_DTYPE, CscMatrix, CsrMatrix

MAGIC = b"RIR1"
VERSION = 1
HEADER = struct.Struct("<4sHHII")
DEFAULT_CAPACITY = 32
MAX_CAPACITY = 0xFFFF

_COUNT_MASK = 0xFFFF
_LAST_BIT = 1 << 16
_KIND_SHIFT = 17


class RirFormatError(ValueError):
    """Malformed bundle stream (bad header, truncation, invariant violation)."""


class BundleKind(enum.IntEnum):
    DATA = 0
    SCHEDULE = 1
    SHAPE = 2


class Kernel(enum.IntEnum):
    CSR = 1
    CSC = 2
    SPGEMM = 3
    CHOLESKY = 4


@dataclass(frozen=True, eq=False)
class RirBundle:
    kind: BundleKind
    shared: int
    indices: np.ndarray
    values: np.ndarray | None = None  # DATA / SHAPE
    starts: np.ndarray | None = None  # SCHEDULE
    ends: np.ndarray | None = None  # SCHEDULE
    last: bool = True

    @classmethod
    def data(cls, shared, indices, values, last=True) -> RirBundle:
        return cls(
            BundleKind.DATA,
            int(shared),
            np.asarray(indices, dtype=np.uint32),
            np.asarray(values, dtype=VALUE_DTYPE),
            last=bool(last),
        )

    @classmethod
    def schedule(cls, shared, rows, starts, ends, last=True) -> RirBundle:
        return cls(
            BundleKind.SCHEDULE,
            int(shared),
            np.asarray(rows, dtype=np.uint32),
            starts=np.asarray(starts, dtype=np.uint32),
            ends=np.asarray(ends, dtype=np.uint32),
            last=bool(last),
        )

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def nbytes(self) -> int:
        per = 12 if self.kind == BundleKind.SCHEDULE else 8
        return per * len(self) + 8

    @property
    def meta_word(self) -> int:
        return len(self) | (_LAST_BIT if self.last else 0) | (int(self.kind) << _KIND_SHIFT)

    def triples(self) -> list[tuple[int, int, int]]:
        return list(zip(self.indices.tolist(), self.starts.tolist(), self.ends.tolist()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RirBundle):
            return NotImplemented
        if (self.kind, self.shared, self.last) != (other.kind, other.shared, other.last):
            return False
        if not np.array_equal(self.indices, other.indices):
            return False
        if self.kind == BundleKind.SCHEDULE:
            return np.array_equal(self.starts, other.starts) and np.array_equal(self.ends, other.ends)
        return self.values.shape == other.values.shape and np.array_equal(
            self.values.view(np.uint32), other.values.view(np.uint32)
        )

    __hash__ = None

    def __repr__(self) -> str:
        flag = ", last" if self.last else ""
        return f"RirBundle({self.kind.name}, shared={self.shared}, n={len(self)}{flag})"


@dataclass(frozen=True, eq=False)
class RirStream:
    kernel: Kernel
    capacity: int
    rows: int
    cols: int
    bundles: list[RirBundle] = field(default_factory=list)

    def __post_init__(self):
        if not 1 <= self.capacity <= MAX_CAPACITY:
            raise ValueError(f"capacity must be in [1, {MAX_CAPACITY}], got {self.capacity}")

    @property
    def nbytes(self) -> int:
        return HEADER.size + 16 + sum(b.nbytes for b in self.bundles)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RirStream):
            return NotImplemented
        return (
            (self.kernel, self.capacity, self.rows, self.cols)
            == (other.kernel, other.capacity, other.rows, other.cols)
            and len(self.bundles) == len(other.bundles)
            and all(a == b for a, b in zip(self.bundles, other.bundles))
        )

    __hash__ = None


def split_row(shared: int, indices, values, capacity: int) -> list[RirBundle]:
    """Cut one logical row into bundles of at most ``capacity`` elements."""
    n = len(indices)
    out = []
    for lo in range(0, n, capacity):
        hi = min(n, lo + capacity)
        out.append(RirBundle.data(shared, indices[lo:hi], values[lo:hi], last=hi == n))
    return out


def _compress(ptr, idx, val, major, capacity) -> list[RirBundle]:
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    bundles = []
    for i in range(major):
        lo, hi = ptr[i], ptr[i + 1]
        if hi > lo:
            bundles.extend(split_row(i, idx[lo:hi], val[lo:hi], capacity))
    return bundles


def compress_csr(m: CsrMatrix, capacity: int = DEFAULT_CAPACITY) -> RirStream:
    bundles = _compress(m.row_pointer, m.col_indices, m.values, m.rows, capacity)
    return RirStream(Kernel.CSR, capacity, m.rows, m.cols, bundles)


def compress_csc(m: CscMatrix, capacity: int = DEFAULT_CAPACITY) -> RirStream:
    bundles = _compress(m.col_pointer, m.row_indices, m.values, m.cols, capacity)
    return RirStream(Kernel.CSC, capacity, m.rows, m.cols, bundles)


def _decompress(s: RirStream, major: int, minor: int):
    counts = np.zeros(major, dtype=INDEX_DTYPE)
    idx_parts, val_parts = [], []
    open_feature = None
    prev_feature = -1
    for pos, b in enumerate(s.bundles):
        where = f"bundle {pos}"
        if b.kind != BundleKind.DATA:
            raise RirFormatError(f"{where}: unexpected {b.kind.name} bundle in a data stream")
        if not 0 < len(b) <= s.capacity:
            raise RirFormatError(f"{where}: {len(b)} elements violates capacity {s.capacity}")
        if not 0 <= b.shared < major:
            raise RirFormatError(f"{where}: shared feature {b.shared} out of range")
        if np.any(np.diff(b.indices.astype(np.int64)) <= 0):
            raise RirFormatError(f"{where}: distinct indices not strictly increasing")
        if b.indices.max() >= minor:
            raise RirFormatError(f"{where}: index out of range")
        if open_feature is None:
            if b.shared <= prev_feature:
                raise RirFormatError(f"{where}: features out of order")
        elif b.shared != open_feature:
            raise RirFormatError(f"{where}: feature {open_feature} missing end-of-row flag")
        elif b.indices[0] <= idx_parts[-1][-1]:
            raise RirFormatError(f"{where}: split row indices not increasing")
        idx_parts.append(b.indices)
        val_parts.append(b.values)
        counts[b.shared] += len(b)
        open_feature = None if b.last else b.shared
        prev_feature = b.shared
    if open_feature is not None:
        raise RirFormatError(f"feature {open_feature} missing end-of-row flag")
    ptr = np.zeros(major + 1, dtype=INDEX_DTYPE)
    np.cumsum(counts, out=ptr[1:])
    idx = np.concatenate(idx_parts).astype(INDEX_DTYPE) if idx_parts else np.zeros(0, INDEX_DTYPE)
    val = np.concatenate(val_parts) if val_parts else np.zeros(0, VALUE_DTYPE)
    return ptr, idx, val


def decompress_to_csr(s: RirStream) -> CsrMatrix:
    if s.kernel != Kernel.CSR:
        raise RirFormatError(f"expected a CSR stream, got {s.kernel.name}")
    ptr, idx, val = _decompress(s, s.rows, s.cols)
    return CsrMatrix(s.rows, s.cols, ptr, idx, val)


def decompress_to_csc(s: RirStream) -> CscMatrix:
    if s.kernel != Kernel.CSC:
        raise RirFormatError(f"expected a CSC stream, got {s.kernel.name}")
    ptr, idx, val = _decompress(s, s.cols, s.rows)
    return CscMatrix(s.rows, s.cols, ptr, idx, val)


# -- wire format ------------------------------------------------------------

_DATA_ELEM = np.dtype([("index", "<u4"), ("value", "<f4")])
_SCHED_ELEM = np.dtype([("row", "<u4"), ("start", "<u4"), ("end", "<u4")])


def _record_bytes(b: RirBundle) -> bytes:
    if b.kind == BundleKind.SCHEDULE:
        body = np.empty(len(b), dtype=_SCHED_ELEM)
        body["row"], body["start"], body["end"] = b.indices, b.starts, b.ends
    else:
        body = np.empty(len(b), dtype=_DATA_ELEM)
        body["index"], body["value"] = b.indices, b.values
    return body.tobytes() + struct.pack("<II", b.shared, b.meta_word)


def serialize(s: RirStream) -> bytes:
    parts = [HEADER.pack(MAGIC, VERSION, int(s.kernel), s.capacity, 0)]
    parts.append(_record_bytes(RirBundle(BundleKind.SHAPE, s.rows, np.array([s.cols], np.uint32), np.zeros(1, VALUE_DTYPE))))
    for b in s.bundles:
        if len(b) > s.capacity:
            raise RirFormatError(f"{b!r} exceeds stream capacity {s.capacity}")
        parts.append(_record_bytes(b))
    return b"".join(parts)


def deserialize(data: bytes) -> RirStream:
    if len(data) < HEADER.size:
        raise RirFormatError("truncated header")
    magic, version, kernel, capacity, _ = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise RirFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise RirFormatError(f"unsupported version {version}")
    try:
        kernel = Kernel(kernel)
    except ValueError:
        raise RirFormatError(f"unknown kernel tag {kernel}") from None

    records = []
    end = len(data)
    while end > HEADER.size:
        if end - HEADER.size < 8:
            raise RirFormatError("truncated record trailer")
        shared, meta = struct.unpack_from("<II", data, end - 8)
        count, last = meta & _COUNT_MASK, bool(meta & _LAST_BIT)
        try:
            kind = BundleKind(meta >> _KIND_SHIFT)
        except ValueError:
            raise RirFormatError(f"unknown bundle kind {meta >> _KIND_SHIFT}") from None
        elem = _SCHED_ELEM if kind == BundleKind.SCHEDULE else _DATA_ELEM
        start = end - 8 - count * elem.itemsize
        if start < HEADER.size:
            raise RirFormatError("truncated record body")
        body = np.frombuffer(data, dtype=elem, count=count, offset=start)
        if kind == BundleKind.SCHEDULE:
            b = RirBundle.schedule(shared, body["row"], body["start"], body["end"], last)
        else:
            b = RirBundle(kind, shared, body["index"].astype(np.uint32), body["value"].astype(VALUE_DTYPE), last=last)
        records.append(b)
        end = start
    records.reverse()
    if not records or records[0].kind != BundleKind.SHAPE or len(records[0]) != 1:
        raise RirFormatError("stream does not start with a shape record")
    shape, bundles = records[0], records[1:]
    for b in bundles:
        if b.kind == BundleKind.SHAPE:
            raise RirFormatError("duplicate shape record")
        if len(b) > capacity:
            raise RirFormatError(f"{b!r} exceeds stream capacity {capacity}")
    return RirStream(kernel, capacity, shape.shared, int(shape.indices[0]), bundles)


def save_stream(path, s: RirStream) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(s))


def load_stream(path) -> RirStream:
    with open(path, "rb") as fh:
        return deserialize(fh.read())


def bundle_stats(s: RirStream) -> dict:
    data = [b for b in s.bundles if b.kind == BundleKind.DATA]
    split_features = {b.shared for b in data if not b.last}
    return {
        "bundles": len(data),
        "schedule_bundles": sum(b.kind == BundleKind.SCHEDULE for b in s.bundles),
        "elements": int(sum(len(b) for b in data)),
        "split_rows": len(split_features),
        "max_bundle": max((len(b) for b in s.bundles), default=0),
        "bytes": s.nbytes,
    }


# -- SpGEMM scheduling ------------------------------------------------------


@dataclass(frozen=True)
class SpgemmGroup:
    """Rows of A handled together, one per pipeline, and the B rows they need.

    ``a_bundles[p]`` is the bundle list for pipeline ``p``'s row;
    ``b_bundles[i]`` belongs to B row ``b_rows[i]``.  B rows are broadcast, so
    each appears once per group.
    """

    a_rows: list[int]
    a_bundles: list[list[RirBundle]]
    b_rows: list[int]
    b_bundles: list[list[RirBundle]]

    @property
    def rounds(self) -> int:
        return max(len(x) for x in self.a_bundles)


@dataclass(frozen=True)
class SpgemmSchedule:
    a_shape: tuple[int, int]
    b_shape: tuple[int, int]
    pipelines: int
    capacity: int
    groups: list[SpgemmGroup]

    def to_stream(self) -> RirStream:
        """Memory image in layout order: each group's A bundles, then its B bundles."""
        bundles = []
        for g in self.groups:
            for bl in g.a_bundles:
                bundles.extend(bl)
            for bl in g.b_bundles:
                bundles.extend(bl)
        return RirStream(Kernel.SPGEMM, self.capacity, self.a_shape[0], self.b_shape[1], bundles)


def build_spgemm_schedule(
    a: CsrMatrix, b: CsrMatrix, pipelines: int, capacity: int = DEFAULT_CAPACITY
) -> SpgemmSchedule:
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    if pipelines < 1 or capacity < 1:
        raise ValueError("pipelines and capacity must be >= 1")
    b_cache: dict[int, list[RirBundle]] = {}

    def b_row(j):
        if j not in b_cache:
            cols, vals = b.row(j)
            b_cache[j] = split_row(j, cols, vals, capacity) if len(cols) else []
        return b_cache[j]

    nonempty = np.nonzero(a.row_nnz())[0].tolist()
    groups = []
    for lo in range(0, len(nonempty), pipelines):
        rows = nonempty[lo : lo + pipelines]
        a_bl, needed = [], set()
        for i in rows:
            cols, vals = a.row(i)
            a_bl.append(split_row(i, cols, vals, capacity))
            needed.update(cols.tolist())
        b_rows = sorted(needed)
        groups.append(SpgemmGroup(rows, a_bl, b_rows, [b_row(j) for j in b_rows]))
    return SpgemmSchedule(a.shape, b.shape, pipelines, capacity, groups)


# -- Cholesky scheduling ----------------------------------------------------


def build_cholesky_schedule(a: CscMatrix, pattern, capacity: int = DEFAULT_CAPACITY) -> RirStream:
    """Per column: RA data bundles for the lower triangle, then RL triples.

    ``pattern`` is a :class:`reapkit.cholesky.SymbolicPattern`.  Each triple is
    ``(r, start, end)`` with the inclusive extent of row ``r`` in the
    row-major L store.
    """
    n = a.cols
    if a.rows != n or pattern.n != n:
        raise ValueError(f"pattern for n={pattern.n} does not match {a.rows}x{a.cols} matrix")
    bundles = []
    for k in range(n):
        rows, vals = a.column(k)
        keep = rows >= k
        bundles.extend(split_row(k, rows[keep], vals[keep], capacity))
        rl = pattern.column(k)
        starts = pattern.row_start[rl]
        ends = pattern.row_start[rl] + pattern.row_counts[rl] - 1
        for lo in range(0, len(rl), capacity):
            hi = min(len(rl), lo + capacity)
            bundles.append(RirBundle.schedule(k, rl[lo:hi], starts[lo:hi], ends[lo:hi], last=hi == len(rl)))
    return RirStream(Kernel.CHOLESKY, capacity, n, n, bundles)
