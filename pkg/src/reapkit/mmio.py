"""Matrix Market coordinate reader/writer.

Supports ``real``, ``integer`` and ``pattern`` fields with ``general`` or
``symmetric`` symmetry.  Indices are 1-based on disk.
"""

from __future__ import annotations

import os

import numpy as np

from .matrix import CooMatrix, CsrMatrix, CscMatrix, csc_to_csr

_FIELDS = {"real", "integer", "pattern"}
_SYMMETRIES = {"general", "symmetric"}


class MatrixMarketError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_matrix_market(text: str) -> CooMatrix:
    lines = text.splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket":
        raise MatrixMarketError("missing %%MatrixMarket header", 1)
    obj, fmt, field, sym = (h.lower() for h in head[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"unsupported layout '{obj} {fmt}'", 1)
    if field not in _FIELDS:
        raise MatrixMarketError(f"unsupported field type '{field}'", 1)
    if sym not in _SYMMETRIES:
        raise MatrixMarketError(f"unsupported symmetry '{sym}'", 1)

    lineno = 1
    size = None
    for lineno in range(2, len(lines) + 1):
        s = lines[lineno - 1].strip()
        if s and not s.startswith("%"):
            size = s.split()
            break
    if size is None:
        raise MatrixMarketError("missing size line", lineno)
    try:
        rows, cols, nnz = (int(x) for x in size)
    except ValueError:
        raise MatrixMarketError("size line must be 'rows cols nnz'", lineno) from None

    want = 2 if field == "pattern" else 3
    r = np.empty(nnz, dtype=np.int64)
    c = np.empty(nnz, dtype=np.int64)
    v = np.ones(nnz, dtype=np.float32)
    k = 0
    for ln in range(lineno + 1, len(lines) + 1):
        s = lines[ln - 1].strip()
        if not s or s.startswith("%"):
            continue
        parts = s.split()
        if len(parts) != want:
            raise MatrixMarketError(f"expected {want} fields, got {len(parts)}", ln)
        if k >= nnz:
            raise MatrixMarketError(f"more than {nnz} entries", ln)
        try:
            i, j = int(parts[0]), int(parts[1])
            if want == 3:
                v[k] = int(parts[2]) if field == "integer" else float(parts[2])
        except ValueError:
            raise MatrixMarketError(f"cannot parse entry '{s}'", ln) from None
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise MatrixMarketError(f"index ({i}, {j}) outside {rows}x{cols}", ln)
        r[k], c[k] = i - 1, j - 1
        k += 1
    if k != nnz:
        raise MatrixMarketError(f"expected {nnz} entries, found {k}", len(lines))

    if sym == "symmetric":
        off = r != c
        r, c, v = (
            np.concatenate([r, c[off]]),
            np.concatenate([c, r[off]]),
            np.concatenate([v, v[off]]),
        )
    return CooMatrix(rows, cols, r, c, v)


def load_matrix_market(path: str | os.PathLike) -> CooMatrix:
    with open(path, encoding="ascii") as fh:
        return parse_matrix_market(fh.read())


def format_matrix_market(m: CooMatrix | CsrMatrix | CscMatrix) -> str:
    if isinstance(m, CscMatrix):
        m = csc_to_csr(m)
    coo = m.to_coo() if isinstance(m, CsrMatrix) else m
    out = ["%%MatrixMarket matrix coordinate real general", f"{coo.rows} {coo.cols} {coo.nnz}"]
    # str() of a float32 is the shortest text that round-trips to the same bits
    out.extend(f"{i + 1} {j + 1} {x}" for i, j, x in zip(coo.row.tolist(), coo.col.tolist(), coo.val))
    return "\n".join(out) + "\n"


def save_matrix_market(path: str | os.PathLike, m) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_matrix_market(m))
