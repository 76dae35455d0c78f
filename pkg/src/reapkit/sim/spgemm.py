"""Cycle-approximate model of the replicated match/multiply/sort/merge pipelines.

Timing model, per group of rows (one row of A per pipeline):

* The input controller streams the schedule from DRAM in layout order
  through the read :class:`MemoryModel`.  Each pipeline loads its A bundle
  into its CAM at one element per cycle.
* Once every participating CAM is loaded, B bundles are broadcast, one
  bundle per cycle on the bus.  A pipeline whose CAM holds the bundle's row
  index copies the elements into its input buffer (``depth`` elements);
  the bus stalls while any hitting pipeline lacks room.
* The matcher spends ``cam_lookup`` cycles per hit bundle, then forwards one
  element per cycle to the multiplier (latency ``mul_latency``).  Products
  queue for the shift-register sorter, which inserts one per cycle but is
  blocked while the merge unit drains it.
* When a row has produced all partials, the merge unit retires them at one
  per cycle.  A row with more partials than ``sort_capacity`` is spilled as
  sorted runs and merged in ``ceil(log2(runs))`` passes.
* Merged elements stream to the write :class:`MemoryModel` in bundle-sized
  chunks as the merge unit retires them.

A pipeline owns one row at a time: its CAM is reloaded only after the
previous row has been merged.  Rows that need several A bundles are
processed in rounds; pipelines with fewer bundles sit out later rounds.
"""

from __future__ import annotations

import math

import numpy as np

from ..matrix import INDEX_DTYPE, CsrMatrix
from ..rir import SpgemmSchedule
from ..spgemm import Partials, merge_partials, sort_partials
from .config import ConfigError, SimConfig
from .memory import MemoryModel
from .report import SimReport, StageStats, model_overlap

STAGES = ("load", "match", "multiply", "sort", "merge")


def modeled_group_prep(schedule: SpgemmSchedule, config: SimConfig) -> list[float]:
    """Host reformatting time per group from the per-element / per-bundle cost constants."""
    out = []
    for g in schedule.groups:
        elems = bundles = 0
        for bl in g.a_bundles + g.b_bundles:
            bundles += len(bl)
            elems += sum(len(b) for b in bl)
        out.append((elems * config.prep_ns_per_element + bundles * config.prep_ns_per_bundle) * 1e-9)
    return out


def simulate_spgemm(
    schedule: SpgemmSchedule, config: SimConfig, group_prep_seconds: list[float] | None = None
) -> SimReport:
    if schedule.capacity > config.cam_size:
        raise ConfigError(f"bundle capacity {schedule.capacity} exceeds CAM size {config.cam_size}")
    if schedule.pipelines != config.pipelines:
        raise ConfigError(f"schedule built for {schedule.pipelines} pipelines, config has {config.pipelines}")
    P = config.pipelines
    c = config.costs
    depth = config.depth
    S = config.sort_capacity
    eb = config.element_bytes
    cap = schedule.capacity
    NEVER = -(10**12)

    read = MemoryModel(config.read_budget, "read")
    writes: list[tuple[int, int, int]] = []

    load_busy = [0] * P
    match_busy = [0] * P
    match_stall = [0] * P
    mul_busy = [0] * P
    sort_busy = [0] * P
    sort_stall = [0] * P
    merge_busy = [0] * P

    cam_free = [0] * P
    match_free = [0] * P
    fwd: list[list[int]] = [[] for _ in range(P)]
    ins: list[list[int]] = [[] for _ in range(P)]
    last_ins = [NEVER] * P
    sorter_free = [0] * P
    run_fill = [0] * P
    spilled_runs = [0] * P
    row_parts: list[list[Partials]] = [[] for _ in range(P)]

    bus_t = 0
    bus_stall = 0
    partials_total = 0
    serial = 0
    merges = 0
    explicit_zeros = 0
    out_rows: dict[int, Partials] = {}
    group_end: list[int] = []

    def finish_row(p: int, row: int) -> int:
        nonlocal merges, explicit_zeros
        ps = Partials.concat(row_parts[p])
        row_parts[p] = []
        k = len(ps)
        if k == 0:
            out_rows[row] = ps
            return cam_free[p]
        runs = spilled_runs[p] + (1 if run_fill[p] else 0)
        start = max(last_ins[p] + c.sort_insert, sorter_free[p])
        cycles = k * c.merge if runs <= 1 else math.ceil(math.log2(runs)) * k * c.merge
        end = start + cycles
        merge_busy[p] += cycles
        sorter_free[p] = end
        run_fill[p] = spilled_runs[p] = 0
        merged = merge_partials(sort_partials(ps))
        out_rows[row] = merged
        merges += k - len(merged)
        explicit_zeros += int(np.count_nonzero(merged.vals == 0))
        # merged elements leave one per merge cycle; each bundle is written once full
        n_out = len(merged)
        for lo in range(0, n_out, cap):
            hi = min(lo + cap, n_out)
            t = end - cycles + -(-cycles * hi // n_out) if n_out else end
            writes.append((t, len(writes), (hi - lo) * eb + 8))
        return end

    for g in schedule.groups:
        gend = 0
        b_pos = {j: i for i, j in enumerate(g.b_rows)}
        for r in range(g.rounds):
            parts = [p for p in range(len(g.a_rows)) if r < len(g.a_bundles[p])]
            cam_ready = 0
            cams: dict[int, list[tuple[int, np.float32]]] = {}
            for p in parts:
                ab = g.a_bundles[p][r]
                ready = read.request(ab.nbytes)
                n = len(ab) * c.cam_load
                load_busy[p] += n
                cam_ready = max(cam_ready, max(ready, cam_free[p]) + n)
                serial += n + len(ab) * (c.row_fetch_latency + c.cam_lookup)
                for key, v in zip(ab.indices.tolist(), ab.values):
                    cams.setdefault(key, []).append((p, v))

            for j in sorted(cams):
                hitters = cams[j]
                for bb in g.b_bundles[b_pos[j]]:
                    m = len(bb)
                    base = max(bus_t, read.request(bb.nbytes), cam_ready)
                    t = base
                    for p, _ in hitters:
                        need = len(fwd[p]) + m - depth
                        if need > 0:
                            t = max(t, fwd[p][need - 1] + 1)
                    bus_stall += t - base
                    bus_t = t + 1
                    for p, av in hitters:
                        row_parts[p].append(Partials(bb.indices.astype(INDEX_DTYPE), av * bb.values))
                        e = max(t, match_free[p]) + c.cam_lookup
                        match_busy[p] += c.cam_lookup
                        fl, il = fwd[p], ins[p]
                        q = len(il)
                        li, sf = last_ins[p], sorter_free[p]
                        fill, runs = run_fill[p], spilled_runs[p]
                        for _ in range(m):
                            f = e
                            if q >= depth:
                                f = max(f, il[q - depth] - c.mul_latency + 1)
                            match_stall[p] += f - e
                            fl.append(f)
                            lo = max(f + c.mul_latency, li + c.sort_insert)
                            i = max(lo, sf)
                            sort_stall[p] += i - lo
                            il.append(i)
                            li = i
                            q += 1
                            fill += 1
                            if fill == S:
                                # full sorter spills its run; inserts wait for the flush
                                sf = i + c.sort_insert + S * c.merge
                                merge_busy[p] += S * c.merge
                                runs += 1
                                fill = 0
                            e = f + 1
                        match_free[p] = e
                        last_ins[p], sorter_free[p] = li, sf
                        run_fill[p], spilled_runs[p] = fill, runs
                        match_busy[p] += m
                        mul_busy[p] += m
                        sort_busy[p] += m * c.sort_insert
                        partials_total += m
                        serial += m * (1 + c.mul_latency + c.sort_insert + c.merge)

            for p in parts:
                cam_free[p] = max(match_free[p], bus_t, cam_ready)
                if r == len(g.a_bundles[p]) - 1:
                    # the sorter and merger hold one row, so the next row waits for this one
                    cam_free[p] = finish_row(p, g.a_rows[p])
                    gend = max(gend, cam_free[p])
            gend = max(gend, bus_t)
        group_end.append(gend)

    write = MemoryModel(config.write_budget, "write")
    write_done = 0
    for t, _, nb in sorted(writes):
        write_done = max(write_done, write.request(nb, t))

    total = max([bus_t, write_done, read.last_ready, *cam_free, *sorter_free, *group_end, 0])
    # fpga time attributed to each group: advance of the completion envelope
    fpga_cycles, prev = [], 0
    for ge in group_end:
        ge = max(prev, ge)
        fpga_cycles.append(ge - prev)
        prev = ge
    if fpga_cycles:
        fpga_cycles[-1] += total - prev

    a_rows, b_cols = schedule.a_shape[0], schedule.b_shape[1]
    ptr = np.zeros(a_rows + 1, dtype=INDEX_DTYPE)
    cols, vals = [], []
    for i in range(a_rows):
        row = out_rows.get(i)
        n = 0 if row is None else len(row)
        if n:
            cols.append(row.cols)
            vals.append(row.vals)
        ptr[i + 1] = ptr[i] + n
    result = CsrMatrix(
        a_rows, b_cols, ptr, np.concatenate(cols) if cols else [], np.concatenate(vals) if vals else []
    )

    hz = config.freq_mhz * 1e6
    fpga_seconds = total / hz
    prep = group_prep_seconds if group_prep_seconds is not None else modeled_group_prep(schedule, config)
    if len(prep) != len(fpga_cycles):
        raise ValueError("group_prep_seconds must have one entry per schedule group")
    fpga_groups = [x / hz for x in fpga_cycles]
    overlapped = model_overlap(prep, fpga_groups) if prep else 0.0

    flops = partials_total + merges
    fp_units = 2 * P  # one multiplier and one merge adder per pipeline
    gflops = flops / fpga_seconds / 1e9 if total else 0.0
    serial_seconds = serial / hz
    stages = {
        "load": StageStats.build(load_busy, [0] * P, total, sum(len(b) for g in schedule.groups for bl in g.a_bundles for b in bl)),
        "match": StageStats.build(match_busy, match_stall, total, partials_total),
        "multiply": StageStats.build(mul_busy, [0] * P, total, partials_total),
        "sort": StageStats.build(sort_busy, sort_stall, total, partials_total),
        "merge": StageStats.build(merge_busy, [0] * P, total, partials_total),
    }
    busy_any = sum(stages["multiply"].busy)
    report = SimReport(
        kernel="spgemm",
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
        multiplies=partials_total,
        bytes_read=read.bytes_total,
        bytes_written=write.bytes_total,
        peak_read_bytes_per_cycle=float(read.peak_bytes_per_cycle),
        peak_write_bytes_per_cycle=float(write.peak_bytes_per_cycle),
        read_budget=float(config.read_budget),
        write_budget=float(config.write_budget),
        pipeline_idle_fraction=1.0 - busy_any / (P * total) if total else 0.0,
        serial_cycles=serial,
        speedup_vs_serial=serial / total if total else 0.0,
        serial_gflops_per_fp_unit=flops / serial_seconds / 1e9 if serial else 0.0,
        output_nnz=result.nnz,
        explicit_zeros=explicit_zeros,
        stages=stages,
        group_prep_seconds=list(prep),
        group_fpga_seconds=fpga_groups,
        extra={"bus_stall_cycles": bus_stall, "groups": len(schedule.groups)},
    )
    report.result = result
    return report
