import numpy as np
from hypothesis import settings
from hypothesis import strategies as st

from reapkit.matrix import CooMatrix, coo_to_csr

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@st.composite
def coo_matrices(draw, max_dim=12, max_nnz=40, min_dim=0):
    """COO lists that may contain duplicates and explicit zeros."""
    rows = draw(st.integers(min_dim, max_dim))
    cols = draw(st.integers(min_dim, max_dim))
    if rows == 0 or cols == 0:
        return CooMatrix(rows, cols, [], [], [])
    n = draw(st.integers(0, max_nnz))
    r = draw(st.lists(st.integers(0, rows - 1), min_size=n, max_size=n))
    c = draw(st.lists(st.integers(0, cols - 1), min_size=n, max_size=n))
    v = draw(st.lists(st.integers(-8, 8).map(float), min_size=n, max_size=n))
    return CooMatrix(rows, cols, r, c, v)


@st.composite
def csr_matrices(draw, max_dim=12, max_nnz=40, min_dim=0):
    return coo_to_csr(draw(coo_matrices(max_dim=max_dim, max_nnz=max_nnz, min_dim=min_dim)))


def dense_of(entries, rows, cols):
    d = np.zeros((rows, cols))
    for i, j, v in entries:
        d[i, j] += v
    return d
