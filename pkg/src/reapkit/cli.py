"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data or verification failure.
Reports are deterministic for fixed inputs and flags; wall-clock timings
appear only when ``--timings`` or ``--measure-prep`` asks for them.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cholesky import analyze, factorize, verify_factor
from .generate import make_spd, random_sparse
from .matrix import CsrMatrix, coo_to_csr, csc_to_csr, csr_to_csc, density
from .mmio import MatrixMarketError, load_matrix_market, save_matrix_market
from .oracle import NotPositiveDefiniteError, dense_spgemm_oracle, max_violation
from .rir import (
    DEFAULT_CAPACITY,
    RirFormatError,
    bundle_stats,
    compress_csc,
    compress_csr,
    decompress_to_csc,
    decompress_to_csr,
    load_stream,
    save_stream,
)
from .sim import KERNELS, PRESETS, ConfigError, SimConfig, preset, reports_to_csv, simulate_matrix
from .spgemm import SpgemmStats, reference_spgemm, spgemm

DENSE_LIMIT = 4096
RESIDUAL_TOL = 1e-4


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def manifest(command: str, inputs: list[str], config: dict | None = None, seed: int | None = None, timings=None) -> dict:
    m = {"command": command, "inputs": inputs, "config": config, "seed": seed, "version": __version__}
    if timings is not None:
        m["timings"] = timings
    return m


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text)


def _load_csr(path: str) -> CsrMatrix:
    return coo_to_csr(load_matrix_market(path))


def _parse_values(text: str, kind=float) -> list:
    try:
        vals = [kind(v) for v in text.replace(",", " ").split()]
    except ValueError as e:
        raise UsageError(f"bad --values: {e}") from None
    if not vals:
        raise UsageError("--values must list at least one value")
    return vals


# -- convert ---------------------------------------------------------------


def cmd_convert(args) -> int:
    src, dst = args.input, args.output
    if src.endswith(".rir"):
        stream = load_stream(src)
        m = decompress_to_csr(stream) if args.layout == "csr" else csc_to_csr(decompress_to_csc(stream))
        save_matrix_market(dst, m)
        print(f"wrote {dst}: {m.rows}x{m.cols}, nnz={m.nnz}")
        return 0
    m = _load_csr(src)
    stream = compress_csr(m, args.capacity) if args.layout == "csr" else compress_csc(csr_to_csc(m), args.capacity)
    save_stream(dst, stream)
    st = bundle_stats(stream)
    print(f"wrote {dst}: {m.rows}x{m.cols}, nnz={m.nnz}, layout={args.layout}, capacity={args.capacity}")
    print(" ".join(f"{k}={v}" for k, v in st.items()))
    return 0


# -- spgemm ----------------------------------------------------------------


def cmd_spgemm(args) -> int:
    a = _load_csr(args.a)
    b = _load_csr(args.b) if args.b else a
    if a.cols != b.rows:
        raise DataError(f"dimension mismatch: {a.rows}x{a.cols} times {b.rows}x{b.cols}")
    stats = SpgemmStats()
    c = spgemm(a, b, args.capacity, stats)
    print(f"C: {c.rows}x{c.cols}, nnz={c.nnz}, density={density(c) if c.rows and c.cols else 0.0:.6g}")
    print(f"flops={stats.flops} (multiplies={stats.partials}, merges={stats.merges}), explicit_zeros={stats.explicit_zeros}")
    if args.out:
        save_matrix_market(args.out, c)
    if args.verify:
        failed = False
        ref = reference_spgemm(a, b)
        if max(a.rows, a.cols, b.cols) <= DENSE_LIMIT:
            ok, err = max_violation(c, dense_spgemm_oracle(a, b), args.rtol, args.atol)
            print(f"dense oracle: {'ok' if ok else 'FAIL'} (max abs err {err:.3g})")
            failed |= not ok
        else:
            print(f"dense oracle: skipped (dimension > {DENSE_LIMIT})")
        same = np.array_equal(c.row_pointer, ref.row_pointer) and np.array_equal(c.col_indices, ref.col_indices)
        diff = np.abs(c.values.astype(np.float64) - ref.values)
        ok = same and bool(np.all(diff <= args.atol + args.rtol * np.abs(ref.values)))
        err = float(diff.max(initial=0.0)) if same else float("inf")
        print(f"reference: {'ok' if ok else 'FAIL'} (max abs err {err:.3g}, pattern {'same' if same else 'differs'})")
        failed |= not ok
        if failed:
            return 2
    return 0


# -- cholesky --------------------------------------------------------------


def cmd_cholesky(args) -> int:
    m = _load_csr(args.a)
    if args.spd:
        m = make_spd(m)
    a = csr_to_csc(m)
    t0 = time.perf_counter()
    _, pattern = analyze(a)
    t1 = time.perf_counter()
    l = factorize(a, pattern)
    t2 = time.perf_counter()
    print(f"L: {l.n}x{l.n}, nnz={l.nnz}, nnz(A)={a.nnz}")
    if l.n <= 10:
        with np.printoptions(precision=6, suppress=True):
            print(l.to_dense())
    if args.timings:
        print(f"timings: symbolic={t1 - t0:.6f}s numeric={t2 - t1:.6f}s")
    if args.out:
        save_matrix_market(args.out, l.to_csc())
    if args.verify:
        res = verify_factor(a, l)
        ok = res.max_abs <= RESIDUAL_TOL * res.max_abs_a
        print(f"residual: max|LL^T - A| = {res.max_abs:.3g} (limit {RESIDUAL_TOL * res.max_abs_a:.3g}) {'ok' if ok else 'FAIL'}")
        if not ok:
            return 2
    return 0


# -- simulate / sweep ------------------------------------------------------


def _config_from_args(args) -> SimConfig:
    base = preset(args.preset) if args.preset else preset("reap32-spgemm" if args.kernel == "spgemm" else "reap32-chol")
    kw = {}
    for flag, field_name in (
        ("pipelines", "pipelines"),
        ("freq_mhz", "freq_mhz"),
        ("read_bw", "read_bw_gbps"),
        ("write_bw", "write_bw_gbps"),
        ("capacity", "bundle_capacity"),
        ("cam_size", "cam_size"),
        ("multipliers", "multipliers_per_pe"),
        ("sort_capacity", "sort_capacity"),
        ("buffer_depth", "buffer_depth"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            kw[field_name] = v
    if "bundle_capacity" in kw and "cam_size" not in kw:
        kw["cam_size"] = max(base.cam_size, kw["bundle_capacity"])
    return base.with_(**kw)


def _summary(r) -> str:
    f = r.summary_fields()
    return "\n".join(
        [
            f"kernel={r.kernel} pipelines={r.pipelines} freq={r.freq_mhz:g} MHz",
            f"cycles={r.total_cycles} fpga={r.fpga_seconds:.6g}s prep={r.cpu_prep_seconds:.6g}s overlapped={r.overlapped_total_seconds:.6g}s",
            f"gflops={r.gflops:.4g} per_fp_unit={r.gflops_per_fp_unit:.4g} (serial model {r.serial_gflops_per_fp_unit:.4g})",
            f"speedup_vs_serial={r.speedup_vs_serial:.4g} idle={100 * r.pipeline_idle_fraction:.1f}%",
            f"prep/compute split: cpu {f['cpu_percent']:.1f}% fpga {f['fpga_percent']:.1f}%",
        ]
    )


def cmd_simulate(args) -> int:
    config = _config_from_args(args)
    m = _load_csr(args.a)
    if args.spd:
        m = make_spd(m)
    t = time.perf_counter()
    report = simulate_matrix(args.kernel, m, config, measure_prep=args.measure_prep)
    timings = {"simulate_seconds": time.perf_counter() - t} if args.measure_prep else None
    print(_summary(report))
    if args.json:
        man = manifest("simulate", [args.a], config.to_dict(), None, timings)
        _write_text(args.json, report.to_json(manifest=man))
    return 0


def _sweep_point(job):
    kernel, m, config = job
    return simulate_matrix(kernel, m, config).summary_fields()


def _pool_size(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("REAPKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"REAPKIT_THREADS must be an integer, got '{env}'") from None
    return os.cpu_count() or 1


def cmd_sweep(args) -> int:
    config = _config_from_args(args)
    values = _parse_values(args.values, int if args.vary == "pipelines" else float)
    jobs = []
    if args.vary == "density":
        if args.n is None:
            raise UsageError("density sweeps need --n")
        for d in values:
            if not 0 < d <= 1:
                raise UsageError(f"density must be in (0, 1], got {d}")
            m = random_sparse(args.n, args.n, d, args.seed)
            if args.kernel == "cholesky":
                m = make_spd(m)
            jobs.append((args.kernel, m, config))
        inputs = []
    else:
        if not args.a:
            raise UsageError(f"--vary {args.vary} needs an input matrix")
        m = _load_csr(args.a)
        if args.spd:
            m = make_spd(m)
        inputs = [args.a]
        for v in values:
            if args.vary == "pipelines":
                jobs.append((args.kernel, m, config.with_(pipelines=v)))
            else:
                ratio = config.write_bw_gbps / config.read_bw_gbps
                jobs.append((args.kernel, m, config.with_(read_bw_gbps=v, write_bw_gbps=v * ratio)))
    workers = min(_pool_size(args.threads), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    rows = [{args.vary: v, **r} for v, r in zip(values, rows)]
    seed = args.seed if args.vary == "density" else None
    man = manifest("sweep", inputs, {"vary": args.vary, "base": config.to_dict(), "n": args.n}, seed)
    text = f"# {json.dumps(man, sort_keys=True)}\n" + reports_to_csv(rows)
    if args.csv:
        _write_text(args.csv, text)
    else:
        sys.stdout.write(text)
    return 0


# -- gen -------------------------------------------------------------------


def cmd_gen(args) -> int:
    cols = args.cols if args.cols is not None else args.rows
    if args.rows < 1 or cols < 1:
        raise UsageError("--rows and --cols must be positive")
    if not 0 < args.density <= 1:
        raise UsageError(f"density must be in (0, 1], got {args.density}")
    m = random_sparse(args.rows, cols, args.density, args.seed)
    if args.spd:
        if args.rows != cols:
            raise UsageError("--spd needs a square matrix")
        m = make_spd(m)
    save_matrix_market(args.output, m)
    print(f"wrote {args.output}: {m.rows}x{m.cols}, nnz={m.nnz}")
    return 0


# -- parser ----------------------------------------------------------------


def _sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", choices=KERNELS, default="spgemm")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--pipelines", type=int)
    p.add_argument("--freq-mhz", type=float)
    p.add_argument("--read-bw", type=float, help="GB/s")
    p.add_argument("--write-bw", type=float, help="GB/s")
    p.add_argument("--capacity", type=int, help="RIR bundle capacity")
    p.add_argument("--cam-size", type=int)
    p.add_argument("--multipliers", type=int, help="multipliers per Cholesky dot PE")
    p.add_argument("--sort-capacity", type=int)
    p.add_argument("--buffer-depth", type=int)
    p.add_argument("--spd", action="store_true", help="symmetrize and shift the input to make it SPD first")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="reapkit", description="Sparse SpGEMM/Cholesky with RIR preprocessing and an accelerator model.")
    ap.add_argument("--version", action="version", version=f"reapkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("convert", help="Matrix Market <-> RIR")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    p.add_argument("--layout", choices=("csr", "csc"), default="csr")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("spgemm", help="C = A*B (B defaults to A)")
    p.add_argument("a")
    p.add_argument("b", nargs="?")
    p.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--rtol", type=float, default=1e-5)
    p.add_argument("--atol", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spgemm)

    p = sub.add_parser("cholesky", help="sparse LL^T")
    p.add_argument("a")
    p.add_argument("--spd", action="store_true", help="symmetrize and shift the input to make it SPD first")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--timings", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cholesky)

    p = sub.add_parser("simulate", help="run the accelerator model on one matrix")
    p.add_argument("a")
    _sim_flags(p)
    p.add_argument("--measure-prep", action="store_true", help="use measured host prep time instead of the cost model")
    p.add_argument("--json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="simulate over a range of one parameter")
    p.add_argument("a", nargs="?")
    _sim_flags(p)
    p.add_argument("--vary", choices=("pipelines", "bandwidth", "density"), required=True)
    p.add_argument("--values", required=True, help="comma or space separated")
    p.add_argument("--n", type=int, help="matrix order for density sweeps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, help="worker processes (default: REAPKIT_THREADS or CPU count)")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="random sparse matrix")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int)
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spd", action="store_true")
    p.add_argument("output")
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as e:
        print(f"reapkit: {e}", file=sys.stderr)
        return 1
    except NotPositiveDefiniteError as e:
        print(f"reapkit: {e}", file=sys.stderr)
        return 2
    except (DataError, MatrixMarketError, RirFormatError, OSError, ValueError) as e:
        print(f"reapkit: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
