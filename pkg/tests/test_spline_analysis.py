import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paradin.analysis import condition_bound_max_Nt, predicted_speedup
from paradin.errors import NonMonotoneKnots, QueryOutOfRange
from paradin.spline import cubic_spline_interpolate_1d


@given(a=st.floats(-5, 5), b=st.floats(-5, 5), k=st.integers(2, 12))
def test_spline_reproduces_linear_functions(a, b, k):
    x = np.linspace(-1.0, 2.0, k)
    q = np.linspace(-1.0, 2.0, 37)
    assert np.allclose(cubic_spline_interpolate_1d(x, a * x + b, q), a * q + b, atol=1e-12)


def test_spline_interpolates_knots_and_sine():
    x = np.linspace(0, np.pi, 9)
    f = np.sin(x)
    assert np.allclose(cubic_spline_interpolate_1d(x, f, x), f, rtol=0, atol=1e-15)
    mid = 0.5 * (x[1:] + x[:-1])
    assert np.max(np.abs(cubic_spline_interpolate_1d(x, f, mid) - np.sin(mid))) <= 1e-3


def test_spline_along_an_axis():
    x = np.linspace(0, 1, 5)
    f = np.outer(np.ones(3), x**2)
    out = cubic_spline_interpolate_1d(x, f, [0.3, 0.6], axis=1)
    assert out.shape == (3, 2) and np.allclose(out[0], out[2])


def test_spline_errors():
    with pytest.raises(NonMonotoneKnots):
        cubic_spline_interpolate_1d([0, 2, 1], [0, 1, 2], [0.5])
    with pytest.raises(NonMonotoneKnots):
        cubic_spline_interpolate_1d([0, 1, 1], [0, 1, 2], [0.5])
    with pytest.raises(QueryOutOfRange):
        cubic_spline_interpolate_1d([0, 1, 2], [0, 1, 2], [2.5])
    with pytest.raises(ValueError):
        cubic_spline_interpolate_1d([0], [0], [0])


def test_condition_bound_reference_values():
    assert condition_bound_max_Nt(64, 1e-3, 1, 1e-16) == 22
    assert condition_bound_max_Nt(64, 1e-12, 1, 1e-16, max_scan=2000) >= 1000
    assert condition_bound_max_Nt(64, 1e-2) <= condition_bound_max_Nt(64, 1e-3)
    assert condition_bound_max_Nt(64, 1e-3, 1, 1.0) == 0
    with pytest.raises(ValueError):
        condition_bound_max_Nt(64, -1.0)


def test_condition_bound_is_tight():
    h, mu, rhs = 1 / 64, 1e-3, math.log(1 / 64**4 / 1e-16)
    lhs = lambda nt: nt * (math.log1p(8 * mu / (nt * h * h)) - math.log1p(2 * math.pi**2 * mu / nt))
    assert lhs(22) < rhs <= lhs(23)


@given(nx=st.integers(4, 256), mu1=st.floats(1e-5, 1e-1), mu2=st.floats(1e-5, 1e-1))
def test_condition_bound_monotone_in_viscosity(nx, mu1, mu2):
    lo, hi = sorted((mu1, mu2))
    assert condition_bound_max_Nt(nx, hi, max_scan=3000) <= condition_bound_max_Nt(nx, lo, max_scan=3000)


def test_predicted_speedup():
    assert predicted_speedup(32, 4, 3) == pytest.approx(32 / 1.5, abs=1e-9)
    assert predicted_speedup(4, 4, 3) == pytest.approx(3.76, abs=5e-3)
    assert abs(predicted_speedup(10**6, 4, 3) - 64) < 0.64
    with pytest.raises(ValueError):
        predicted_speedup(4, 4, 2)


@given(nt=st.integers(1, 10**5), cf=st.integers(2, 8))
def test_predicted_speedup_bounds(nt, cf):
    s = predicted_speedup(nt, cf, 3)
    assert 0 < s < min(nt, cf**3) + 1e-9
