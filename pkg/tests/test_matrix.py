import numpy as np
import pytest
from conftest import coo_matrices, csr_matrices, dense_of
from hypothesis import given

from reapkit.generate import random_sparse
from reapkit.matrix import (
    CooMatrix,
    CscMatrix,
    CsrMatrix,
    coo_to_csr,
    csc_to_csr,
    csr_from_dense,
    csr_to_coo,
    csr_to_csc,
    density,
    identity,
    pattern_symmetric,
    segment_sum_f32,
    transpose,
    zeros,
)


def test_identity_coo_to_csr():
    m = coo_to_csr(CooMatrix(3, 3, [0, 1, 2], [0, 1, 2], [1, 1, 1]))
    assert m.row_pointer.tolist() == [0, 1, 2, 3]
    assert m.col_indices.tolist() == [0, 1, 2]
    assert m.values.tolist() == [1, 1, 1]


def test_empty():
    m = coo_to_csr(CooMatrix(2, 2, [], [], []))
    assert m.row_pointer.tolist() == [0, 0, 0]
    assert m.nnz == 0


def test_duplicates_summed():
    m = coo_to_csr(CooMatrix.from_entries(1, 2, [(0, 1, 2.0), (0, 1, 3.0)]))
    assert m.to_coo().entries() == [(0, 1, 5.0)]


def test_explicit_zero_kept():
    m = coo_to_csr(CooMatrix(2, 2, [0, 1], [1, 0], [0.0, 2.0]))
    assert m.nnz == 2


def test_row_vector_to_csc():
    m = csr_from_dense(np.array([[0.0, 5.0, 0.0]]))
    c = csr_to_csc(m)
    assert c.col_pointer.tolist() == [0, 0, 1, 1]


def test_transpose_twice_dense():
    m = random_sparse(8, 8, 0.2, seed=4)
    assert np.array_equal(transpose(transpose(m)).to_dense(), m.to_dense())
    assert np.array_equal(transpose(m).to_dense(), m.to_dense().T)


def test_density():
    assert density(identity(3)) == pytest.approx(1 / 3)
    assert density(csr_from_dense(np.ones((2, 2)))) == 1.0
    # a 496x496 matrix with 49k non-zeros sits near one fifth
    assert density(random_sparse(496, 496, 49_000 / 496**2, seed=1)) == pytest.approx(0.199, abs=5e-4)
    with pytest.raises(ValueError):
        density(zeros(0, 3))


def test_invalid_csr_rejected():
    with pytest.raises(ValueError):
        CsrMatrix(2, 2, [0, 2, 1], [0, 1], [1, 1])
    with pytest.raises(ValueError):
        CsrMatrix(1, 3, [0, 2], [2, 1], [1, 1])
    with pytest.raises(ValueError):
        CsrMatrix(1, 3, [0, 1], [3], [1])
    with pytest.raises(ValueError):
        CscMatrix(2, 2, [0, 1], [0], [1])


def test_coo_out_of_range():
    with pytest.raises(ValueError):
        CooMatrix(2, 2, [2], [0], [1.0])


def test_segment_sum_is_left_to_right():
    # pairwise summation would give a different f32 result for this run
    vals = np.array([1e8, 1.0, -1e8, 1.0] * 3, dtype=np.float32)
    out = segment_sum_f32(vals, np.array([0]), np.array([len(vals)]))
    acc = np.float32(0)
    for v in vals:
        acc = np.float32(acc + v)
    assert out[0] == acc


def test_pattern_symmetric():
    assert pattern_symmetric(identity(4))
    assert not pattern_symmetric(csr_from_dense(np.array([[1.0, 1.0], [0.0, 1.0]])))


@given(coo_matrices())
def test_coo_to_csr_matches_dense_accumulation(coo):
    m = coo_to_csr(coo)
    assert np.array_equal(m.to_dense(), dense_of(coo.entries(), coo.rows, coo.cols))
    for i in range(m.rows):
        cols, _ = m.row(i)
        assert np.all(np.diff(cols) > 0)


@given(csr_matrices())
def test_csr_csc_round_trip(m):
    assert csc_to_csr(csr_to_csc(m)) == m
    assert coo_to_csr(csr_to_coo(m)) == m
    assert np.array_equal(csr_to_csc(m).to_dense(), m.to_dense())
