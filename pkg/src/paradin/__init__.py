"""All-at-once backward Euler time integration with exact block decoupling.

The Newton system over all time levels is block lower bidiagonal.  It is
reduced to independent per-level systems whose matrices are ordered
products of the level Jacobians, so every level can be solved at once.
"""

from .analysis import condition_bound_max_Nt, predicted_speedup
from .banded import BandedMatrix, DiagonalScaling, OpCounter, band_lu_solve, band_matmul, band_matvec, diagonal_of
from .decoupled import DecoupledSystem, build_decoupled, solve_decoupled
from .discretization import SpaceTimeGrid, assemble_jacobian, exact_global, spatial_operator, step_residual
from .models import Domain, FaceRule, ModelKind, ModelSpec, custom_model, nonlinear_heat, viscous_burgers
from .runtime import RowPartition, TimingReport, measure_run, parallel_build_decoupled, parallel_solve_levels, partition_rows
from .sequential import NewtonConfig, SolveStats, run_sequential
from .solver import ParadinConfig, coarse_initial_guess, run_paradin
from .spline import cubic_spline_interpolate_1d

__version__ = "0.1.0"

__all__ = [
    "BandedMatrix",
    "DecoupledSystem",
    "DiagonalScaling",
    "Domain",
    "FaceRule",
    "ModelKind",
    "ModelSpec",
    "NewtonConfig",
    "OpCounter",
    "ParadinConfig",
    "RowPartition",
    "SolveStats",
    "SpaceTimeGrid",
    "TimingReport",
    "assemble_jacobian",
    "band_lu_solve",
    "band_matmul",
    "band_matvec",
    "build_decoupled",
    "coarse_initial_guess",
    "condition_bound_max_Nt",
    "cubic_spline_interpolate_1d",
    "custom_model",
    "diagonal_of",
    "exact_global",
    "measure_run",
    "nonlinear_heat",
    "parallel_build_decoupled",
    "parallel_solve_levels",
    "partition_rows",
    "predicted_speedup",
    "run_paradin",
    "run_sequential",
    "solve_decoupled",
    "spatial_operator",
    "step_residual",
    "viscous_burgers",
]
