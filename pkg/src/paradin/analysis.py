"""Closed-form cost and conditioning estimates."""

from __future__ import annotations

import math


def condition_bound_max_Nt(N_x: int, mu: float, c: float = 1.0, eps_rof: float = 1e-16, max_scan: int = 100_000) -> int:
    """Largest N_t whose estimated product condition number stays below the
    reciprocal accumulated roundoff, for the linear heat model on [0, 1]^2
    with h = 1/N_x and tau = 1/N_t:

        ((1 + 8 mu / (N_t h^2)) / (1 + 2 pi^2 mu / N_t))^N_t  <  c h^4 / eps_rof

    Returns 0 if N_t = 1 already violates it and ``max_scan`` if the scan
    reaches the cap.
    """
    if N_x <= 0 or mu <= 0 or c <= 0 or eps_rof <= 0:
        raise ValueError("all inputs must be positive")
    h = 1.0 / N_x
    log_rhs = math.log(c) + 4.0 * math.log(h) - math.log(eps_rof)
    best = 0
    for nt in range(1, max_scan + 1):
        lhs = nt * (math.log1p(8.0 * mu / (nt * h * h)) - math.log1p(2.0 * math.pi**2 * mu / nt))
        if not lhs < log_rhs:
            break
        best = nt
    return best


def predicted_speedup(N_t: int, c_f: int, p: float = 3) -> float:
    """Model speedup N_t / (N_t / c_f^p + 1) of the all-at-once solve over
    time marching, with the coarse initial guess as the serial part."""
    if N_t <= 0 or c_f <= 0:
        raise ValueError("N_t and c_f must be positive")
    if p < 3:
        raise ValueError("the cost exponent is at least 3 in two space dimensions")
    return N_t / (N_t / c_f**p + 1.0)
