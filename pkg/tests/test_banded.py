import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_banded, stencil_pattern
from paradin.banded import (
    BandedMatrix,
    OpCounter,
    assemble_row_blocks,
    band_lu_factor,
    band_lu_solve,
    band_matmul,
    band_matmul_rows,
    band_matvec,
    diagonal_of,
)
from paradin.errors import DimensionMismatch, SingularPivot, ZeroDiagonal

offset_sets = st.lists(st.integers(-12, 12), min_size=1, max_size=6, unique=True)


def test_construction_and_dense_roundtrip(rng):
    a = random_banded(rng, 9, [-3, 0, 2])
    assert np.array_equal(BandedMatrix.from_dense(a.to_dense()).to_dense(), a.to_dense())
    assert a.bandwidths == (3, 2)
    with pytest.raises(ValueError):
        BandedMatrix(4, [1, 0], np.zeros((2, 4)))
    with pytest.raises(ValueError):
        BandedMatrix(4, [0, 4], np.zeros((2, 4)))
    with pytest.raises(DimensionMismatch):
        BandedMatrix.from_diagonals(4, {1: np.ones(4)})


def test_text_dump_roundtrip(rng):
    a = random_banded(rng, 7, [-2, 0, 1, 5])
    assert BandedMatrix.loads(a.dumps()).identical(a)


def test_lu_small_cases():
    x = band_lu_solve(BandedMatrix.identity(4), [1.0, 2.0, 3.0, 4.0])
    assert np.array_equal(x, [1, 2, 3, 4])
    a = BandedMatrix.from_dense([[2.0, -1.0], [-1.0, 2.0]])
    assert np.allclose(band_lu_solve(a, [1.0, 1.0]), [1.0, 1.0], rtol=1e-15)


def test_lu_matches_dense_solver(rng):
    for _ in range(5):
        a = random_banded(rng, 50, range(-7, 8), diag_shift=8.0)
        b = rng.standard_normal(50)
        x = band_lu_solve(a, b)
        ref = np.linalg.solve(a.to_dense(), b)
        assert np.max(np.abs(x - ref)) <= 1e-10 * np.max(np.abs(ref))


@given(n=st.integers(1, 150), kl=st.integers(0, 80), ku=st.integers(0, 80), seed=st.integers(0, 10**6))
def test_blocked_lu_reconstructs_the_matrix(n, kl, ku, seed):
    rng = np.random.default_rng(seed)
    a = random_banded(rng, n, range(-kl, ku + 1), diag_shift=3.0 * (kl + ku + 1))
    ab, kl2, ku2 = band_lu_factor(a)
    dense_ab = np.zeros((n, n))
    for i in range(n):
        for j in range(max(0, i - kl2), min(n, i + ku2 + 1)):
            dense_ab[i, j] = ab[ku2 + i - j, j]
    L = np.tril(dense_ab, -1) + np.eye(n)
    U = np.triu(dense_ab)
    assert np.allclose(L @ U, a.to_dense(), atol=1e-10 * np.abs(a.to_dense()).max())


def test_singular_pivot_reported():
    a = BandedMatrix.from_dense([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(SingularPivot) as info:
        band_lu_solve(a, [1.0, 2.0])
    assert info.value.row == 1
    with pytest.raises(DimensionMismatch):
        band_lu_solve(a, [1.0])


def test_matmul_small_cases(rng):
    a = random_banded(rng, 10, [-2, 0, 3])
    assert band_matmul(BandedMatrix.identity(10), a).identical(a)
    t1 = random_banded(rng, 10, [-1, 0, 1])
    t2 = random_banded(rng, 10, [-1, 0, 1])
    z = band_matmul(t1, t2)
    assert list(z.offsets) == [-2, -1, 0, 1, 2]
    assert np.allclose(z.to_dense(), t1.to_dense() @ t2.to_dense(), rtol=0, atol=1e-14)
    with pytest.raises(DimensionMismatch):
        band_matmul(a, BandedMatrix.identity(3))


@given(n=st.integers(1, 40), xo=offset_sets, yo=offset_sets, seed=st.integers(0, 10**6))
def test_matmul_and_matvec_match_dense(n, xo, yo, seed):
    rng = np.random.default_rng(seed)
    x = random_banded(rng, n, [d for d in xo if abs(d) < n] or [0])
    y = random_banded(rng, n, [d for d in yo if abs(d) < n] or [0])
    ref = x.to_dense() @ y.to_dense()
    z = band_matmul(x, y)
    assert np.allclose(z.to_dense(), ref, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(ref).max()))
    assert all(np.any(z.data[k] != 0) for k in range(len(z.offsets))) or z.nnz() == 0
    v = rng.standard_normal(n)
    assert np.allclose(band_matvec(x, v), x.to_dense() @ v, rtol=1e-12, atol=1e-12)


def test_matvec_small_cases():
    v = np.array([1.0, 2.0, 3.0])
    assert np.array_equal(band_matvec(BandedMatrix.identity(3), v), v)
    d2 = BandedMatrix(3, [0], np.full((1, 3), 2.0))
    assert np.array_equal(band_matvec(d2, v), [2.0, 4.0, 6.0])
    with pytest.raises(DimensionMismatch):
        band_matvec(d2, [1.0, 2.0])


@given(n=st.integers(2, 60), batches=st.integers(1, 7), seed=st.integers(0, 10**6))
def test_row_batches_are_bitwise_identical(n, batches, seed):
    rng = np.random.default_rng(seed)
    x = random_banded(rng, n, rng.choice(np.arange(-n + 1, n), size=min(5, 2 * n - 1), replace=False))
    y = random_banded(rng, n, rng.choice(np.arange(-n + 1, n), size=min(5, 2 * n - 1), replace=False))
    cuts = np.unique(np.concatenate([[0, n], rng.integers(0, n, batches)]))
    blocks = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        offs, blk = band_matmul_rows(x.data[:, lo:hi], x.offsets, y, lo, hi)
        blocks.append((lo, hi, offs, blk))
    assert assemble_row_blocks(n, blocks).identical(band_matmul(x, y))


def test_products_do_not_commute(rng):
    a1, a2 = stencil_pattern(rng, 4), stencil_pattern(rng, 4)
    diff = band_matmul(a1, a2).to_dense() - band_matmul(a2, a1).to_dense()
    assert np.linalg.norm(diff) > 0


def test_operation_count_bound(rng):
    for _ in range(30):
        n = int(rng.integers(5, 60))
        x = random_banded(rng, n, rng.integers(-6, 7, size=4))
        y = random_banded(rng, n, rng.integers(-6, 7, size=int(rng.integers(1, 6))))
        c = OpCounter()
        z = band_matmul(x, y, c)
        d = int(np.count_nonzero(y.to_dense(), axis=0).max())
        assert c.total <= 2 * z.nnz() * d
        assert c.multiplies >= z.nnz()


@pytest.mark.parametrize("n", [1, 2, 3])
def test_diagonal_count_law_small_grid(rng, n):
    m = 8
    p = stencil_pattern(rng, m)
    for _ in range(n - 1):
        p = band_matmul(p, stencil_pattern(rng, m))
    assert len(p.offsets) == 2 * n * n + 2 * n + 1


def test_diagonal_scaling(rng):
    assert np.array_equal(diagonal_of(BandedMatrix.identity(5)).values, np.ones(5))
    x = BandedMatrix(2, [0], np.array([[4.0, 2.0]]))
    s = diagonal_of(x)
    scaled, b = s.apply(x, [4.0, 2.0])
    assert np.array_equal(scaled.to_dense(), np.eye(2)) and np.array_equal(b, [1.0, 1.0])
    a = random_banded(rng, 30, range(-3, 4), diag_shift=6.0)
    rhs = rng.standard_normal(30)
    x1 = band_lu_solve(a, rhs, diagonal_of(a))
    x2 = band_lu_solve(a, rhs)
    assert np.allclose(x1, x2, rtol=1e-10)
    with pytest.raises(ZeroDiagonal):
        diagonal_of(BandedMatrix(2, [0], np.array([[1.0, 0.0]])))
    with pytest.raises(ZeroDiagonal):
        diagonal_of(BandedMatrix(2, [1], np.array([[1.0, 0.0]])))
