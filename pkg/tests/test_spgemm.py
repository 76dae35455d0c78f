import itertools

import numpy as np
import pytest
from conftest import csr_matrices
from hypothesis import given
from hypothesis import strategies as st

from reapkit.generate import random_sparse
from reapkit.matrix import VALUE_DTYPE, csr_from_dense, identity, zeros
from reapkit.oracle import dense_spgemm_oracle, max_violation
from reapkit.rir import RirBundle
from reapkit.spgemm import (
    CamOverflowError,
    CamTable,
    Partials,
    SpgemmStats,
    match_multiply,
    merge_partials,
    partial_count,
    reference_spgemm,
    sort_partials,
    spgemm,
)


def _cam(*pairs, shared=0):
    cam = CamTable(32)
    cols, vals = zip(*pairs)
    cam.load(RirBundle.data(shared, cols, vals))
    return cam


def test_match_single_hit():
    out = match_multiply(_cam((0, 2.0)), [RirBundle.data(0, [1], [3.0])])
    assert out.tolist() == [(1, 6.0)]


def test_match_miss():
    assert len(match_multiply(_cam((0, 1.0)), [RirBundle.data(1, [0], [3.0])])) == 0


def test_match_brute_force():
    a = random_sparse(8, 8, 0.4, seed=3)
    b = random_sparse(8, 8, 0.4, seed=4)
    for i in range(8):
        ac, av = a.row(i)
        if not len(ac):
            continue
        cam = CamTable(32)
        cam.load(RirBundle.data(i, ac, av))
        stream = [RirBundle.data(j, *b.row(j)) for j in range(8) if len(b.row(j)[0])]
        got = sorted(match_multiply(cam, stream).tolist())
        want = sorted(
            (int(c), float(VALUE_DTYPE(x) * VALUE_DTYPE(y)))
            for k, x in zip(ac, av)
            for c, y in zip(*b.row(k))
        )
        assert got == want


def test_cam_overflow():
    with pytest.raises(CamOverflowError):
        CamTable(2).load(RirBundle.data(0, [1, 2, 3], [1, 1, 1]))


def test_sort():
    assert len(sort_partials(Partials.empty())) == 0
    assert sort_partials([(3, 1.0), (1, 2.0), (2, 3.0)]).cols.tolist() == [1, 2, 3]
    rng = np.random.default_rng(0)
    items = list(zip(rng.integers(0, 50, 1000).tolist(), rng.standard_normal(1000).tolist()))
    got = sort_partials(items).tolist()
    want = sorted(((c, float(np.float32(v))) for c, v in items), key=lambda t: t[0])
    assert got == want


def test_merge():
    assert merge_partials([(1, 2.0), (1, 3.0)]).tolist() == [(1, 5.0)]
    assert merge_partials([(0, 1.0), (2, 1.0)]).tolist() == [(0, 1.0), (2, 1.0)]
    with pytest.raises(ValueError):
        merge_partials([(2, 1.0), (1, 1.0)])


def test_merge_left_to_right():
    rng = np.random.default_rng(1)
    cols = np.sort(rng.integers(0, 10, 300))
    vals = rng.standard_normal(300).astype(np.float32)
    got = merge_partials(Partials(cols, vals))
    acc = {}
    for c, v in zip(cols.tolist(), vals):
        acc[c] = np.float32(acc[c] + v) if c in acc else v
    assert got.cols.tolist() == sorted(acc)
    assert got.vals.tolist() == [acc[c] for c in sorted(acc)]


def test_identity_products_bitwise():
    a = random_sparse(20, 20, 0.2, seed=2)
    assert spgemm(a, identity(20)) == a
    assert spgemm(identity(20), a) == a


def test_zero_and_scalar():
    assert spgemm(csr_from_dense([[2.0]]), csr_from_dense([[3.0]])).to_dense().tolist() == [[6.0]]
    a = random_sparse(5, 4, 0.5, seed=1)
    assert spgemm(a, zeros(4, 3)).nnz == 0
    assert reference_spgemm(a, zeros(4, 3)).nnz == 0


def test_associativity_with_identity():
    a, b = random_sparse(6, 6, 0.4, 1), random_sparse(6, 6, 0.4, 2)
    ab = spgemm(a, b)
    assert spgemm(ab, identity(6)) == ab


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        spgemm(identity(2), identity(3))


@pytest.mark.parametrize("cap", [1, 2, 32])
@pytest.mark.parametrize("seed", range(3))
def test_matches_dense_oracle(seed, cap):
    a = random_sparse(60, 60, 0.08, seed)
    ok, _ = max_violation(spgemm(a, a, cap), dense_spgemm_oracle(a, a))
    assert ok


def test_capacity_does_not_change_result_on_short_rows():
    a = random_sparse(40, 40, 0.05, seed=7)
    assert spgemm(a, a, 32) == spgemm(a, a, 1024)


def test_reference_exact_vs_dense_oracle():
    # both accumulate in float64 in ascending inner index, so they agree exactly
    a, b = random_sparse(30, 25, 0.15, 1), random_sparse(25, 20, 0.2, 2)
    ref = reference_spgemm(a, b)
    assert np.array_equal(ref.to_dense(), dense_spgemm_oracle(a, b).astype(np.float32))


@given(csr_matrices(max_dim=8, max_nnz=30, min_dim=1), st.integers(1, 4))
def test_integer_inputs_agree_exactly(a, cap):
    # small integers multiply and sum exactly in float32
    sq = csr_from_dense(np.ones((a.cols, a.cols)))
    c = spgemm(a, sq, cap)
    ref = reference_spgemm(a, sq)
    assert c == ref


def test_stats_and_partial_count():
    a = random_sparse(50, 50, 0.1, seed=3)
    st_ = SpgemmStats()
    c = spgemm(a, a, 32, st_)
    assert st_.partials == int(partial_count(a, a).sum())
    assert st_.merges == st_.partials - c.nnz
    assert st_.flops == st_.partials + st_.merges


def test_explicit_zero_kept_on_cancellation():
    a = csr_from_dense(np.array([[1.0, 1.0]]))
    b = csr_from_dense(np.array([[2.0], [-2.0]]))
    st_ = SpgemmStats()
    c = spgemm(a, b, stats=st_)
    assert c.nnz == 1 and c.values[0] == 0 and st_.explicit_zeros == 1
