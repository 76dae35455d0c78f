"""Simulation results, CPU/accelerator overlap accounting and serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

REPORT_SCHEMA = "reapkit.simreport/1"


def model_overlap(prep_times, fpga_times) -> float:
    """Total time when host prep of group i+1 overlaps accelerator work on group i.

    Only the first group's prep is exposed; every later step costs the
    larger of the two, and the last group's accelerator time is appended.
    """
    prep, fpga = list(prep_times), list(fpga_times)
    if not prep:
        raise ValueError("model_overlap needs at least one group")
    if len(prep) != len(fpga):
        raise ValueError(f"length mismatch: {len(prep)} prep vs {len(fpga)} fpga")
    total = prep[0]
    for i in range(1, len(prep)):
        total += max(prep[i], fpga[i - 1])
    return total + fpga[-1]


def prep_compute_split(report: SimReport) -> tuple[float, float]:
    """Host-prep and accelerator shares (percent) of the non-overlapped sum."""
    total = report.cpu_prep_seconds + report.fpga_seconds
    if total <= 0:
        raise ValueError("report has zero total time")
    cpu = 100.0 * report.cpu_prep_seconds / total
    return cpu, 100.0 - cpu


@dataclass
class StageStats:
    busy: list[int]
    stalled: list[int]
    idle: list[int]
    processed: int = 0

    @classmethod
    def build(cls, busy, stalled, total, processed=0) -> StageStats:
        idle = [total - b - s for b, s in zip(busy, stalled)]
        if min(idle, default=0) < 0:
            raise AssertionError("stage accounting exceeds total cycles")
        return cls(list(busy), list(stalled), idle, processed)

    def to_dict(self) -> dict:
        return {"busy": self.busy, "stalled": self.stalled, "idle": self.idle, "processed": self.processed}


@dataclass
class SimReport:
    kernel: str
    pipelines: int
    freq_mhz: float
    total_cycles: int
    fpga_seconds: float
    cpu_prep_seconds: float
    overlapped_total_seconds: float
    flops: int
    gflops: float
    fp_units: int
    gflops_per_fp_unit: float
    multiplies: int
    bytes_read: int
    bytes_written: int
    peak_read_bytes_per_cycle: float
    peak_write_bytes_per_cycle: float
    read_budget: float
    write_budget: float
    pipeline_idle_fraction: float
    serial_cycles: int
    speedup_vs_serial: float
    serial_gflops_per_fp_unit: float
    output_nnz: int
    explicit_zeros: int
    stages: dict[str, StageStats] = field(default_factory=dict)
    group_prep_seconds: list[float] = field(default_factory=list)
    group_fpga_seconds: list[float] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    result: object = field(default=None, repr=False, compare=False)

    @property
    def cpu_percent(self) -> float:
        return prep_compute_split(self)[0]

    @property
    def fpga_percent(self) -> float:
        return prep_compute_split(self)[1]

    def summary_fields(self) -> dict:
        """Flat scalar view; key order is the CSV column order."""
        cpu, fpga = prep_compute_split(self) if self.cpu_prep_seconds + self.fpga_seconds > 0 else (0.0, 0.0)
        out = {
            "kernel": self.kernel,
            "pipelines": self.pipelines,
            "freq_mhz": self.freq_mhz,
            "total_cycles": self.total_cycles,
            "fpga_seconds": self.fpga_seconds,
            "cpu_prep_seconds": self.cpu_prep_seconds,
            "overlapped_total_seconds": self.overlapped_total_seconds,
            "cpu_percent": cpu,
            "fpga_percent": fpga,
            "flops": self.flops,
            "gflops": self.gflops,
            "fp_units": self.fp_units,
            "gflops_per_fp_unit": self.gflops_per_fp_unit,
            "multiplies": self.multiplies,
            "bytes_read": self.bytes_read,
            "bytes_written": self.bytes_written,
            "peak_read_bytes_per_cycle": self.peak_read_bytes_per_cycle,
            "peak_write_bytes_per_cycle": self.peak_write_bytes_per_cycle,
            "read_budget": self.read_budget,
            "write_budget": self.write_budget,
            "pipeline_idle_fraction": self.pipeline_idle_fraction,
            "serial_cycles": self.serial_cycles,
            "speedup_vs_serial": self.speedup_vs_serial,
            "serial_gflops_per_fp_unit": self.serial_gflops_per_fp_unit,
            "output_nnz": self.output_nnz,
            "explicit_zeros": self.explicit_zeros,
        }
        for name, st in self.stages.items():
            out[f"{name}_busy"] = sum(st.busy)
            out[f"{name}_stalled"] = sum(st.stalled)
            out[f"{name}_idle"] = sum(st.idle)
        return out

    def to_dict(self) -> dict:
        d = {"schema": REPORT_SCHEMA}
        d.update(self.summary_fields())
        d["stages"] = {k: v.to_dict() for k, v in self.stages.items()}
        d["group_prep_seconds"] = self.group_prep_seconds
        d["group_fpga_seconds"] = self.group_fpga_seconds
        d["extra"] = self.extra
        return d

    def to_json(self, **extra) -> str:
        d = self.to_dict()
        d.update(extra)
        return json.dumps(d, indent=2) + "\n"


def reports_to_csv(rows: list[dict]) -> str:
    """CSV text for a list of flat dicts; columns follow the first row's key order."""
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
