"""Cycle-approximate accelerator model."""

from .cholesky import simulate_cholesky
from .config import PRESETS, ConfigError, CostModel, SimConfig, preset
from .memory import BandwidthExceeded, MemoryModel
from .report import SimReport, StageStats, model_overlap, prep_compute_split, reports_to_csv
from .run import KERNELS, simulate_matrix
from .spgemm import simulate_spgemm

__all__ = [
    "KERNELS",
    "PRESETS",
    "BandwidthExceeded",
    "ConfigError",
    "CostModel",
    "MemoryModel",
    "SimConfig",
    "SimReport",
    "StageStats",
    "model_overlap",
    "preset",
    "prep_compute_split",
    "reports_to_csv",
    "simulate_cholesky",
    "simulate_matrix",
    "simulate_spgemm",
]
