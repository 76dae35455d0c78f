"""Cycle-approximate model of the column-parallel Cholesky datapath.

Column k is a hard barrier.  The input controller fetches the column's RA
bundles and RL triples, reads row k of L and broadcasts it into every
dot-product CAM.  Rows of pattern(k) are dealt round-robin to the
pipelines.  Every active pipeline first recomputes the diagonal on its own
(dot of row k with itself, then a square root) so that it never waits on
another pipeline.  For each assigned row r it then reads row r of L,
streams it through the CAM ``multipliers_per_pe`` elements per cycle,
subtracts the dot product and divides by the diagonal in the Div/SqRoot
unit.  Pipelines without a row for this column idle until the barrier.
"""

from __future__ import annotations

import heapq
import math

from ..cholesky import SymbolicPattern, factorize
from ..matrix import CscMatrix
from ..rir import BundleKind, Kernel, RirStream
from .config import ConfigError, SimConfig
from .memory import MemoryModel
from .report import SimReport, StageStats, model_overlap

STAGES = ("dot", "divsqrt")


def _column_records(stream: RirStream, n: int):
    ra_bytes = [0] * n
    elems = [0] * n
    bundles = [0] * n
    rl_rows: list[list[int]] = [[] for _ in range(n)]
    for b in stream.bundles:
        k = b.shared
        if not 0 <= k < n:
            raise ValueError(f"bundle for column {k} outside matrix of order {n}")
        ra_bytes[k] += b.nbytes
        elems[k] += len(b)
        bundles[k] += 1
        if b.kind == BundleKind.SCHEDULE:
            rl_rows[k].extend(b.indices.tolist())
    return ra_bytes, elems, bundles, rl_rows


def modeled_column_prep(stream: RirStream, config: SimConfig) -> list[float]:
    _, elems, bundles, _ = _column_records(stream, stream.cols)
    return [(e * config.prep_ns_per_element + b * config.prep_ns_per_bundle) * 1e-9 for e, b in zip(elems, bundles)]


def simulate_cholesky(
    stream: RirStream,
    a: CscMatrix,
    pattern: SymbolicPattern,
    config: SimConfig,
    column_prep_seconds: list[float] | None = None,
) -> SimReport:
    if stream.kernel != Kernel.CHOLESKY:
        raise ValueError(f"expected a Cholesky stream, got {stream.kernel.name}")
    if stream.capacity > config.cam_size:
        raise ConfigError(f"bundle capacity {stream.capacity} exceeds CAM size {config.cam_size}")
    n = a.cols
    if stream.cols != n or pattern.n != n:
        raise ValueError("stream, matrix and pattern disagree on the order")
    ra_bytes, _, _, rl_rows = _column_records(stream, n)
    for k in range(n):
        if rl_rows[k] != pattern.column(k).tolist():
            raise ValueError(f"RL triples for column {k} do not match the symbolic pattern")

    cols_info: list[tuple[list[int], list[int], list[int]]] = []
    result = factorize(a, pattern, on_column=lambda k, rows, lens, m: cols_info.append((rows, lens, m)))

    P = config.pipelines
    c = config.costs
    mult = config.multipliers_per_pe
    eb = config.element_bytes
    read = MemoryModel(config.read_budget, "read")
    write = MemoryModel(config.write_budget, "write")

    dot_busy = [0] * P
    dot_stall = [0] * P
    div_busy = [0] * P
    div_stall = [0] * P
    idle_pipe_cycles = 0
    col_cycles = []
    serial = flops = multiplies = redundant = 0
    t0 = 0

    for k, (rows, lens, matches) in enumerate(cols_info):
        len_k = lens[0]  # rows are ascending, so row k comes first
        meta_ready = read.request(ra_bytes[k], t0)
        rowk_ready = read.request(len_k * eb, t0)
        cam_ready = max(meta_ready, rowk_ready) + len_k * c.cam_load
        diag_dot = math.ceil(len_k / mult) + c.add_latency

        active = min(P, len(rows))
        dot_free = [0] * active
        div_free = [0] * active
        col_dot = [0] * active
        col_div = [0] * active
        for p in range(active):
            dot_free[p] = cam_ready + diag_dot
            div_free[p] = dot_free[p] + c.sqrt_latency
            col_dot[p] = diag_dot
            col_div[p] = c.sqrt_latency
        redundant += (active - 1) * len_k

        col_writes = [(div_free[0], 0)]  # L(k, k) from pipeline 0's own diagonal
        # pipeline p owns rows p, p + P, ...; row 0 is the diagonal and needs no extra work
        heap = [(dot_free[p], p, p) for p in range(1, active)]
        if P < len(rows):
            heap.append((dot_free[0], 0, P))
        heapq.heapify(heap)
        while heap:
            _, p, i = heapq.heappop(heap)
            len_r = lens[i]
            ready = read.request(len_r * eb, dot_free[p])
            s = max(dot_free[p], ready)
            cyc = math.ceil(len_r / mult) + c.add_latency
            dot_free[p] = s + cyc
            col_dot[p] += cyc
            d = max(dot_free[p], div_free[p])
            div_free[p] = d + c.div_latency
            col_div[p] += c.div_latency
            col_writes.append((div_free[p], i))
            if i + P < len(rows):
                heapq.heappush(heap, (dot_free[p], p, i + P))

        done = max([cam_ready, *div_free, *dot_free]) if active else cam_ready
        for t, _ in sorted(col_writes):
            done = max(done, write.request(eb, t))
        dur = done - t0
        col_cycles.append(dur)
        for p in range(active):
            dot_busy[p] += col_dot[p]
            div_busy[p] += col_div[p]
            dot_stall[p] += dur - col_dot[p]
            div_stall[p] += dur - col_div[p]
        idle_pipe_cycles += (P - active) * dur
        t0 = done

        nrows = len(rows)
        multiplies += sum(matches)
        flops += 2 * sum(matches) + nrows + 1 + (nrows - 1)
        serial += len_k * c.cam_load + sum(lens) + nrows * c.add_latency + c.sqrt_latency + (nrows - 1) * c.div_latency

    total = t0
    stages = {
        "dot": StageStats.build(dot_busy, dot_stall, total, multiplies),
        "divsqrt": StageStats.build(div_busy, div_stall, total, n),
    }

    hz = config.freq_mhz * 1e6
    fpga_seconds = total / hz
    prep = column_prep_seconds if column_prep_seconds is not None else modeled_column_prep(stream, config)
    if len(prep) != n:
        raise ValueError("column_prep_seconds must have one entry per column")
    fpga_cols = [x / hz for x in col_cycles]
    overlapped = model_overlap(prep, fpga_cols) if n else 0.0
    fp_units = P * mult + P
    gflops = flops / fpga_seconds / 1e9 if total else 0.0
    serial_seconds = serial / hz
    report = SimReport(
        kernel="cholesky",
        pipelines=P,
        freq_mhz=config.freq_mhz,
        total_cycles=total,
        fpga_seconds=fpga_seconds,
        cpu_prep_seconds=float(sum(prep)),
        overlapped_total_seconds=overlapped,
        flops=flops,
        gflops=gflops,
        fp_units=fp_units,
        gflops_per_fp_unit=gflops / fp_units,
        multiplies=multiplies,
        bytes_read=read.bytes_total,
        bytes_written=write.bytes_total,
        peak_read_bytes_per_cycle=float(read.peak_bytes_per_cycle),
        peak_write_bytes_per_cycle=float(write.peak_bytes_per_cycle),
        read_budget=float(config.read_budget),
        write_budget=float(config.write_budget),
        pipeline_idle_fraction=idle_pipe_cycles / (P * total) if total else 0.0,
        serial_cycles=serial,
        speedup_vs_serial=serial / total if total else 0.0,
        serial_gflops_per_fp_unit=flops / serial_seconds / 1e9 if serial else 0.0,
        output_nnz=result.nnz,
        explicit_zeros=int((result.values == 0).sum()),
        stages=stages,
        group_prep_seconds=list(prep),
        group_fpga_seconds=fpga_cols,
        extra={"redundant_diagonal_multiplies": redundant, "idle_pipeline_cycles": idle_pipe_cycles},
    )
    report.result = result
    return report
