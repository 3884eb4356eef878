"""Exact decoupling of the block-bidiagonal all-at-once Newton system.

The Newton system over all levels is

    A_1 du_1                = r_1
    -du_{n-1} + A_n du_n    = r_n,   n = 2..N

Multiplying row n by P_{n-1} = A_1 ... A_{n-1} and substituting the rows
above gives N independent systems

    P_n du_n = rt_n,   P_n = P_{n-1} A_n,   rt_n = P_{n-1} r_n + rt_{n-1}

with P_1 = A_1 and rt_1 = r_1.  Each level can then be solved on its own.
The product order matters because the A_n do not commute.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .banded import (
    PIVOT_FLOOR,
    BandedMatrix,
    DiagonalScaling,
    band_lu_solve,
    band_matmul,
    band_matvec,
    diagonal_of,
)
from .errors import DimensionMismatch, SingularPivot, ZeroDiagonal


@dataclass
class DecoupledLevel:
    P: BandedMatrix
    rhs: np.ndarray
    scaling: DiagonalScaling

    def identical(self, other: "DecoupledLevel") -> bool:
        return (
            self.P.identical(other.P)
            and self.rhs.tobytes() == other.rhs.tobytes()
            and self.scaling.values.tobytes() == other.scaling.values.tobytes()
        )


@dataclass
class DecoupledSystem:
    levels: list[DecoupledLevel]

    def __len__(self):
        return len(self.levels)

    def identical(self, other: "DecoupledSystem") -> bool:
        return len(self) == len(other) and all(a.identical(b) for a, b in zip(self.levels, other.levels))


def make_level(P: BandedMatrix, rhs, level: int, pivot_floor: float = PIVOT_FLOOR) -> DecoupledLevel:
    try:
        scaling = diagonal_of(P, pivot_floor)
    except ZeroDiagonal as exc:
        raise ZeroDiagonal(exc.row, exc.value, level=level) from None
    return DecoupledLevel(P, np.asarray(rhs, dtype=float), scaling)


def build_decoupled(jacobians, residuals, pivot_floor: float = PIVOT_FLOOR, timing=None) -> DecoupledSystem:
    """Serial recursion for all (P_n, rt_n) pairs.

    ``timing``, if given, is a TimingReport whose ``product_build`` and
    ``rhs_build`` fields are incremented.
    """
    if len(jacobians) != len(residuals) or not jacobians:
        raise DimensionMismatch("need one residual per Jacobian and at least one level")
    n = jacobians[0].n
    for a, r in zip(jacobians, residuals):
        if a.n != n or np.shape(r) != (n,):
            raise DimensionMismatch("all levels must share one dimension")
    P = jacobians[0].pruned()
    rt = np.asarray(residuals[0], dtype=float).copy()
    levels = [make_level(P, rt, 1, pivot_floor)]
    for l in range(1, len(jacobians)):
        t0 = time.perf_counter()
        P_next = band_matmul(P, jacobians[l])
        t1 = time.perf_counter()
        rt = band_matvec(P, residuals[l]) + rt
        t2 = time.perf_counter()
        if timing is not None:
            timing.product_build += t1 - t0
            timing.rhs_build += t2 - t1
        P = P_next
        levels.append(make_level(P, rt, l + 1, pivot_floor))
    return DecoupledSystem(levels)


def solve_level(entry: DecoupledLevel, level: int, preconditioning: bool = True, pivot_floor: float = PIVOT_FLOOR):
    try:
        return band_lu_solve(entry.P, entry.rhs, entry.scaling if preconditioning else None, pivot_floor)
    except SingularPivot as exc:
        raise SingularPivot(exc.row, exc.value, level=level) from None


def solve_decoupled(sys: DecoupledSystem, preconditioning: bool = True, pivot_floor: float = PIVOT_FLOOR):
    """Solve every level independently; returns an ``(N, n)`` array."""
    return np.stack([solve_level(e, l + 1, preconditioning, pivot_floor) for l, e in enumerate(sys.levels)])
