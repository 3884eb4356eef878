import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_banded, stencil_pattern
from paradin.banded import BandedMatrix, band_matmul, band_matvec
from paradin.decoupled import build_decoupled, solve_decoupled
from paradin.errors import DimensionMismatch, SingularPivot, ZeroDiagonal


def block_forward_substitution(jacs, res):
    """Dense solve of the full block lower-bidiagonal system."""
    nt, n = len(jacs), jacs[0].n
    big = np.zeros((nt * n, nt * n))
    for l, a in enumerate(jacs):
        big[l * n : (l + 1) * n, l * n : (l + 1) * n] = a.to_dense()
        if l:
            big[l * n : (l + 1) * n, (l - 1) * n : l * n] = -np.eye(n)
    return np.linalg.solve(big, np.concatenate(res)).reshape(nt, n)


def random_instance(rng, nt, n, width=2):
    jacs = [random_banded(rng, n, range(-width, width + 1), scale=0.3, diag_shift=1.5) for _ in range(nt)]
    res = [rng.standard_normal(n) for _ in range(nt)]
    return jacs, res


def test_base_case_and_second_level(rng):
    jacs, res = random_instance(rng, 2, 2, 1)
    sys = build_decoupled(jacs[:1], res[:1])
    assert sys.levels[0].P.identical(jacs[0]) and np.array_equal(sys.levels[0].rhs, res[0])
    sys = build_decoupled(jacs, res)
    a1, a2 = jacs[0].to_dense(), jacs[1].to_dense()
    assert np.allclose(sys.levels[1].P.to_dense(), a1 @ a2, rtol=1e-15)
    assert np.allclose(sys.levels[1].rhs, a1 @ res[1] + res[0], rtol=1e-15)


def test_recursion_consistency(rng):
    jacs, res = random_instance(rng, 5, 12)
    sys = build_decoupled(jacs, res)
    for l in range(1, 5):
        prev = sys.levels[l - 1]
        assert sys.levels[l].P.identical(band_matmul(prev.P, jacs[l]))
        assert np.array_equal(sys.levels[l].rhs, band_matvec(prev.P, res[l]) + prev.rhs)
        assert np.array_equal(sys.levels[l].scaling.values, sys.levels[l].P.diagonal(0))


def test_identity_jacobians(rng):
    n, nt = 6, 4
    res = [rng.standard_normal(n) for _ in range(nt)]
    sys = build_decoupled([BandedMatrix.identity(n)] * nt, res)
    for l, lev in enumerate(sys.levels):
        assert np.array_equal(lev.P.to_dense(), np.eye(n))
        assert np.allclose(lev.rhs, np.sum(res[: l + 1], axis=0))
    du = solve_decoupled(sys)
    assert np.allclose(du, np.cumsum(res, axis=0))


@given(nt=st.integers(1, 8), n=st.integers(1, 50), seed=st.integers(0, 10**6))
def test_matches_dense_block_solve(nt, n, seed):
    rng = np.random.default_rng(seed)
    jacs, res = random_instance(rng, nt, n)
    ref = block_forward_substitution(jacs, res)
    for pre in (True, False):
        du = solve_decoupled(build_decoupled(jacs, res), preconditioning=pre)
        rel = np.max(np.abs(du - ref)) / np.max(np.abs(ref))
        assert rel <= (1e-12 if nt <= 3 else 1e-8)


def test_preconditioning_does_not_change_well_conditioned_solutions(rng):
    jacs, res = random_instance(rng, 3, 4)
    sys = build_decoupled(jacs, res)
    a, b = solve_decoupled(sys, True), solve_decoupled(sys, False)
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_order_matters(rng):
    jacs = [stencil_pattern(rng, 4) for _ in range(3)]
    res = [rng.standard_normal(16) for _ in range(3)]
    fwd = solve_decoupled(build_decoupled(jacs, res))
    rev = solve_decoupled(build_decoupled(jacs[::-1], res))
    assert np.max(np.abs(fwd[-1] - rev[-1])) > 0


def test_errors_carry_level(rng):
    jacs, res = random_instance(rng, 3, 5)
    with pytest.raises(DimensionMismatch):
        build_decoupled(jacs, res[:2])
    with pytest.raises(DimensionMismatch):
        build_decoupled(jacs, res[:2] + [np.zeros(4)])
    zero_diag = BandedMatrix(5, [-1, 0], np.vstack([np.ones(5), np.zeros(5)]))
    with pytest.raises(ZeroDiagonal) as info:
        build_decoupled([jacs[0], zero_diag], res[:2])
    assert info.value.level == 2
    singular = BandedMatrix.from_dense(np.array([[1.0, 1.0], [1.0, 1.0]]))
    sys = build_decoupled([BandedMatrix.identity(2), singular], [np.ones(2), np.ones(2)])
    with pytest.raises(SingularPivot) as info:
        solve_decoupled(sys)
    assert info.value.level == 2
