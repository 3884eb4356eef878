"""Natural cubic spline interpolation along one axis."""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import NonMonotoneKnots, QueryOutOfRange


def cubic_spline_interpolate_1d(knots_x, knots_f, query_x, axis: int = 0) -> np.ndarray:
    """Natural cubic spline through ``(knots_x, knots_f)`` evaluated at ``query_x``.

    ``knots_f`` may carry extra dimensions; ``axis`` selects the one that
    runs along the knots.  With two knots the natural spline is the line
    through them.
    """
    x = np.asarray(knots_x, dtype=float)
    q = np.asarray(query_x, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("need at least two knots")
    if np.any(np.diff(x) <= 0):
        raise NonMonotoneKnots("knots must be strictly increasing")
    slack = 1e-12 * (x[-1] - x[0])
    if q.size and (q.min() < x[0] - slack or q.max() > x[-1] + slack):
        raise QueryOutOfRange(f"queries span [{q.min()}, {q.max()}], knots span [{x[0]}, {x[-1]}]")
    spline = CubicSpline(x, np.asarray(knots_f, dtype=float), axis=axis, bc_type="natural")
    return spline(np.clip(q, x[0], x[-1]))
