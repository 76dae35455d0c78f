import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reapkit.cholesky import NONE, analyze, build_etree, cholesky, factorize, sparse_dot, verify_factor
from reapkit.generate import banded, grid_laplacian, make_spd, random_sparse
from reapkit.matrix import csr_from_dense, csr_to_csc, identity
from reapkit.oracle import NotPositiveDefiniteError, dense_cholesky_oracle


def _csc(d):
    return csr_to_csc(csr_from_dense(np.asarray(d, dtype=float)))


def _tridiag(n):
    return _csc(np.diag(np.full(n, 4.0)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1))


def _arrow(n):
    d = np.eye(n) * n
    d[-1, :] = d[:, -1] = 1.0
    d[-1, -1] = n
    return _csc(d)


def _dense_pattern(a):
    return np.abs(dense_cholesky_oracle(a.to_dense())) > 1e-12


def test_etree_shapes():
    assert build_etree(_csc(np.eye(4))).parent.tolist() == [NONE] * 4
    assert build_etree(_tridiag(4)).parent.tolist() == [1, 2, 3, NONE]
    assert build_etree(_arrow(5)).parent.tolist() == [4, 4, 4, 4, NONE]


def test_etree_rejects_bad_input():
    with pytest.raises(ValueError):
        build_etree(_csc(np.ones((2, 3))))
    with pytest.raises(ValueError):
        build_etree(_csc([[1.0, 1.0], [0.0, 1.0]]))


def test_symbolic_patterns():
    _, p = analyze(_csc(np.eye(3)))
    assert [p.column(k).tolist() for k in range(3)] == [[0], [1], [2]]
    _, p = analyze(_tridiag(4))
    assert [p.column(k).tolist() for k in range(4)] == [[0, 1], [1, 2], [2, 3], [3]]
    assert p.row_extent(2) == (3, 4)


@pytest.mark.parametrize("seed", range(6))
def test_symbolic_superset_of_dense_factor(seed):
    a = csr_to_csc(make_spd(random_sparse(30, 30, 0.06, seed)))
    _, p = analyze(a)
    sym = np.zeros((30, 30), dtype=bool)
    for k in range(30):
        sym[p.column(k), k] = True
    assert np.all(sym[_dense_pattern(a)])


def test_etree_parent_is_first_offdiagonal_of_column():
    a = csr_to_csc(make_spd(random_sparse(40, 40, 0.05, 3)))
    tree, p = analyze(a)
    for k in range(40):
        col = p.column(k)
        assert tree.parent[k] == (col[1] if len(col) > 1 else NONE)


def test_small_factors():
    assert np.array_equal(cholesky(_csc(np.diag([4.0, 9.0, 16.0]))).to_dense(), np.diag([2.0, 3.0, 4.0]))
    assert cholesky(_csc([[4.0, 2.0], [2.0, 5.0]])).to_dense().tolist() == [[2, 0], [1, 2]]


def test_not_spd_reports_column():
    with pytest.raises(NotPositiveDefiniteError) as e:
        cholesky(_csc([[1.0, 2.0], [2.0, 1.0]]))
    assert e.value.column == 1


def test_not_spd_column_matches_dense_oracle():
    d = make_spd(random_sparse(12, 12, 0.2, 1)).to_dense()
    d[7, 7] = -5.0
    with pytest.raises(NotPositiveDefiniteError) as dense:
        dense_cholesky_oracle(d)
    with pytest.raises(NotPositiveDefiniteError) as sparse:
        cholesky(_csc(d))
    assert sparse.value.column == dense.value.column


def test_sparse_dot():
    assert sparse_dot([0, 2], [1.0, 1.0], [1, 3], [1.0, 1.0], 10) == 0.0
    assert sparse_dot([4], [2.0], [4], [3.0], 5) == 6.0
    assert sparse_dot([4], [2.0], [4], [3.0], 4) == 0.0
    rng = np.random.default_rng(0)
    for _ in range(20):
        x, y = rng.standard_normal(20), rng.standard_normal(20)
        x[rng.random(20) < 0.5] = 0
        y[rng.random(20) < 0.5] = 0
        xi, yi = np.nonzero(x)[0], np.nonzero(y)[0]
        got = sparse_dot(xi, x[xi], yi, y[yi], 20)
        assert got == pytest.approx(float(np.float32(x) @ np.float32(y)), abs=1e-5)


@pytest.mark.parametrize(
    "m",
    [grid_laplacian(8), make_spd(banded(60, 3, seed=2)), make_spd(random_sparse(80, 80, 0.04, seed=5))],
    ids=["grid", "banded", "random"],
)
def test_residual(m):
    a = csr_to_csc(m)
    l = cholesky(a)
    res = verify_factor(a, l)
    assert res.max_abs <= 1e-4 * res.max_abs_a
    assert np.allclose(l.to_dense(), dense_cholesky_oracle(a.to_dense()), atol=1e-4)


def test_diagonal_residual_zero():
    a = _csc(np.diag([1.0, 4.0, 9.0]))
    assert verify_factor(a, cholesky(a)).max_abs == 0.0


def test_factor_layout_and_callback():
    a = csr_to_csc(grid_laplacian(4))
    _, p = analyze(a)
    seen = []
    l = factorize(a, p, on_column=lambda k, rows, lens, m: seen.append((k, rows, lens, m)))
    assert [s[0] for s in seen] == list(range(16))
    for k, rows, lens, m in seen:
        assert rows == p.column(k).tolist()
        assert all(x <= y for x, y in zip(m, lens))
    assert np.array_equal(l.row_pointer[:-1], p.row_start)
    assert l.extents()[:, 1].tolist() == (p.row_start + p.row_counts - 1).tolist()
    assert l.to_csc().to_dense().tolist() == l.to_dense().tolist()


def test_deterministic():
    a = csr_to_csc(make_spd(random_sparse(50, 50, 0.05, 9)))
    assert cholesky(a) == cholesky(a)


@given(st.integers(2, 25), st.floats(0.02, 0.3), st.integers(0, 10_000))
def test_random_spd_property(n, d, seed):
    a = csr_to_csc(make_spd(random_sparse(n, n, d, seed)))
    res = verify_factor(a, cholesky(a))
    assert res.max_abs <= 1e-4 * res.max_abs_a
