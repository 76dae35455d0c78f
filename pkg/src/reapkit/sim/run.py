"""Matrix-in, report-out entry point shared by the CLI commands."""

from __future__ import annotations

import time

from ..cholesky import analyze
from ..matrix import CsrMatrix, csr_to_csc
from ..rir import build_cholesky_schedule, build_spgemm_schedule
from .cholesky import modeled_column_prep, simulate_cholesky
from .config import SimConfig
from .report import SimReport
from .spgemm import modeled_group_prep, simulate_spgemm

KERNELS = ("spgemm", "cholesky")


def _spread(total: float, weights: list[float]) -> list[float]:
    s = sum(weights)
    if s <= 0:
        return [total / len(weights)] * len(weights) if weights else []
    return [total * w / s for w in weights]


def simulate_matrix(kernel: str, a: CsrMatrix, config: SimConfig, measure_prep: bool = False) -> SimReport:
    """Build the RIR schedule for ``a`` and simulate it (SpGEMM computes A*A).

    With ``measure_prep`` the host schedule-building wall clock replaces the
    modeled prep cost; it is spread over groups in proportion to the model.
    """
    if kernel == "spgemm":
        t = time.perf_counter()
        sched = build_spgemm_schedule(a, a, config.pipelines, config.bundle_capacity)
        elapsed = time.perf_counter() - t
        prep = _spread(elapsed, modeled_group_prep(sched, config)) if measure_prep else None
        return simulate_spgemm(sched, config, prep)
    if kernel == "cholesky":
        t = time.perf_counter()
        csc = csr_to_csc(a)
        _, pattern = analyze(csc)
        stream = build_cholesky_schedule(csc, pattern, config.bundle_capacity)
        elapsed = time.perf_counter() - t
        prep = _spread(elapsed, modeled_column_prep(stream, config)) if measure_prep else None
        return simulate_cholesky(stream, csc, pattern, config, prep)
    raise ValueError(f"unknown kernel '{kernel}' (choose from {', '.join(KERNELS)})")
