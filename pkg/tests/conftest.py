import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from paradin.banded import BandedMatrix

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_banded(rng, n, offsets, scale=1.0, diag_shift=0.0):
    offsets = sorted(set(int(d) for d in offsets if abs(d) < n))
    data = np.zeros((len(offsets), n))
    for k, d in enumerate(offsets):
        lo, hi = max(0, -d), min(n, n - d)
        data[k, lo:hi] = scale * rng.standard_normal(hi - lo)
        if d == 0:
            data[k, lo:hi] += diag_shift
    return BandedMatrix(n, offsets, data)


def stencil_pattern(rng, m, my=None, diag_shift=4.0):
    """Random matrix with the five-point Jacobian pattern on an m x my interior grid."""
    my = m if my is None else my
    n = m * my
    i = np.arange(n) % m
    j = np.arange(n) // m
    diags = {0: diag_shift + rng.uniform(0.5, 1.0, n)}
    diags[1] = np.where(i[:-1] < m - 1, rng.uniform(-1, -0.1, n - 1), 0.0)
    diags[-1] = np.where(i[1:] > 0, rng.uniform(-1, -0.1, n - 1), 0.0)
    if my > 1:
        diags[m] = np.where(j[: n - m] < my - 1, rng.uniform(-1, -0.1, n - m), 0.0)
        diags[-m] = np.where(j[m:] > 0, rng.uniform(-1, -0.1, n - m), 0.0)
    return BandedMatrix.from_diagonals(n, diags)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
