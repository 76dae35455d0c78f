"""Per-FP-unit throughput of the modeled design against the serial stage-sum model.

The intended invariant is that the design never does worse per FP unit than the
serial model.  It holds for narrow SpGEMM designs; the cases marked xfail record
where the model breaks it and why.
"""

import pytest

from reapkit.cholesky import analyze
from reapkit.generate import grid_laplacian, make_spd, random_sparse
from reapkit.matrix import csr_to_csc
from reapkit.rir import build_cholesky_schedule, build_spgemm_schedule
from reapkit.sim import preset, simulate_cholesky, simulate_spgemm

MATS = {
    "rand300": lambda: random_sparse(300, 300, 0.02, 1),
    "grid15": lambda: grid_laplacian(15),
}


def _spgemm(name, p):
    a = MATS[name]()
    return simulate_spgemm(build_spgemm_schedule(a, a, p), preset("reap32-spgemm").with_(pipelines=p))


@pytest.mark.parametrize("name", sorted(MATS))
@pytest.mark.parametrize("p", [1, 2, 8])
def test_spgemm_per_unit_not_below_serial_narrow(name, p):
    r = _spgemm(name, p)
    assert r.gflops_per_fp_unit >= r.serial_gflops_per_fp_unit


@pytest.mark.xfail(strict=True, reason="small matrices leave most of 32 pipelines without rows in the last group")
def test_spgemm_per_unit_wide_design_small_matrix():
    r = _spgemm("rand300", 32)
    assert r.gflops_per_fp_unit >= r.serial_gflops_per_fp_unit


@pytest.mark.xfail(strict=True, reason="multiplier arrays idle behind the non-pipelined divide/sqrt on short columns")
def test_cholesky_per_unit_vs_serial():
    a = csr_to_csc(make_spd(random_sparse(120, 120, 0.04, 2)))
    _, pat = analyze(a)
    r = simulate_cholesky(build_cholesky_schedule(a, pat), a, pat, preset("reap32-chol"))
    assert r.gflops_per_fp_unit >= r.serial_gflops_per_fp_unit
