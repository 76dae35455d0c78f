"""Streams whose serialized bytes are pinned under tests/golden/.

Run ``python3 tests/golden_cases.py`` to regenerate after an intended
format change.
"""

from pathlib import Path

import numpy as np

from reapkit.cholesky import analyze
from reapkit.matrix import csr_from_dense, csr_to_csc, identity
from reapkit.rir import RirBundle, RirStream, Kernel, build_cholesky_schedule, compress_csc, compress_csr

GOLDEN_DIR = Path(__file__).parent / "golden"


def cases() -> dict:
    long_row = np.zeros((2, 80), dtype=np.float32)
    long_row[1, :70] = np.arange(1, 71) / 8
    spd = csr_to_csc(csr_from_dense(np.array([[4.0, 2.0], [2.0, 5.0]])))
    _, pattern = analyze(spd)
    return {
        "identity3_csr": compress_csr(identity(3)),
        "split70_csr": compress_csr(csr_from_dense(long_row)),
        "column5_csc_cap2": compress_csc(csr_to_csc(csr_from_dense(np.arange(1, 6, dtype=np.float32).reshape(5, 1))), 2),
        "single_bundle": RirStream(Kernel.CSR, 32, 3, 6, [RirBundle.data(2, [5], [1.0])]),
        "empty_4x3": RirStream(Kernel.CSR, 32, 4, 3, []),
        "chol_2x2": build_cholesky_schedule(spd, pattern),
    }


if __name__ == "__main__":
    from reapkit.rir import serialize

    GOLDEN_DIR.mkdir(exist_ok=True)
    for name, s in cases().items():
        (GOLDEN_DIR / f"{name}.rir").write_bytes(serialize(s))
