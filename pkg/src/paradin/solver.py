"""All-at-once Newton solver over every time level.

Each global Newton iteration assembles the Jacobian and residual of every
level at the current iterate, decouples the block-bidiagonal system into
independent level systems and solves them.  The starting iterate comes from
a time-marching solve on a grid coarsened in x, y and t, interpolated back
with natural cubic splines.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .analysis import condition_bound_max_Nt
from .banded import PIVOT_FLOOR
from .decoupled import build_decoupled, solve_decoupled
from .discretization import (
    SpaceTimeGrid,
    assemble_jacobian,
    assemble_jacobian_rows,
    exact_field,
    padded_state,
    step_residual,
    step_residual_rows,
)
from .errors import ConditioningBreakdown, NewtonDiverged, SingularPivot, ZeroDiagonal
from .models import ModelSpec, characteristic_viscosity
from .runtime import TimingReport, WorkerPool, default_workers
from .sequential import IterationRecord, NewtonConfig, SolveStats, rms, run_sequential
from .spline import cubic_spline_interpolate_1d

EXECUTORS = ("serial", "pool")


@dataclass(frozen=True)
class ParadinConfig:
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    coarsening_factor: int = 4
    preconditioning: bool = True
    executor: str = "serial"
    workers: int | None = None
    pivot_floor: float = PIVOT_FLOOR

    def __post_init__(self):
        if self.coarsening_factor < 2:
            raise ValueError("coarsening factor must be at least 2")
        if self.executor not in EXECUTORS:
            raise ValueError(f"executor must be one of {EXECUTORS}, got {self.executor!r}")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be positive")

    def worker_count(self) -> int:
        return default_workers() if self.workers is None else self.workers


class NewtonLevels:
    """Per-level Jacobian and residual rows at a fixed global iterate.

    This is the interface the worker pool assembles from: ``n``,
    ``n_levels``, ``state(l)``, ``jacobian_rows`` and ``residual_rows``.
    """

    def __init__(self, grid: SpaceTimeGrid, model: ModelSpec, U, u0):
        self.grid, self.model = grid, model
        self.U = np.asarray(U, dtype=float)
        self.u0 = np.asarray(u0, dtype=float)
        self.n = grid.ns
        self.n_levels = grid.nt

    def state(self, level: int) -> np.ndarray:
        return self.u0 if level == 0 else self.U[level - 1]

    def jacobian_rows(self, level, u, lo, hi):
        return assemble_jacobian_rows(self.grid, self.model, u, self.grid.time(level), lo, hi)

    def residual_rows(self, level, u, u_prev, lo, hi):
        return step_residual_rows(self.grid, self.model, u, u_prev, self.grid.time(level), lo, hi)

    def jacobians(self):
        g, m = self.grid, self.model
        return [assemble_jacobian(g, m, self.state(l), g.time(l)) for l in range(1, g.nt + 1)]

    def residuals(self):
        g, m = self.grid, self.model
        return [step_residual(g, m, self.state(l), self.state(l - 1), g.time(l)) for l in range(1, g.nt + 1)]


def coarse_initial_guess(grid: SpaceTimeGrid, model: ModelSpec, coarsening_factor: int, newton: NewtonConfig):
    """Time-march on the coarsened grid, then interpolate along x, y and t.

    Boundary data and the initial condition act as knots, so every fine
    node lies inside the knot range.  Returns an ``(nt, ns)`` array.
    """
    coarse = grid.coarsened(coarsening_factor)
    Uc, _ = run_sequential(coarse, model, newton)
    full = [padded_state(coarse, model, exact_field(coarse, model, 0.0), 0.0)]
    full += [padded_state(coarse, model, Uc[n - 1], coarse.time(n)) for n in range(1, coarse.nt + 1)]
    W = np.stack(full)  # (nt_c + 1, ny_c + 1, nx_c + 1)
    W = cubic_spline_interpolate_1d(coarse.x_nodes, W, grid.x_nodes[1:-1], axis=2)
    W = cubic_spline_interpolate_1d(coarse.y_nodes, W, grid.y_nodes[1:-1], axis=1)
    W = cubic_spline_interpolate_1d(coarse.times, W, grid.times[1:], axis=0)
    return W.reshape(grid.nt, grid.ns)


def _breakdown(grid, model, exc):
    bound = condition_bound_max_Nt(grid.nx, characteristic_viscosity(model) or model.mu0)
    kind = "zero diagonal" if isinstance(exc, ZeroDiagonal) else "vanishing pivot"
    return ConditioningBreakdown(
        f"{kind} at level {exc.level}, row {exc.row} ({exc.value!r}); "
        f"products over more than about {bound} levels are too ill-conditioned at this resolution",
        exc.level,
        bound,
    )


def run_paradin(grid: SpaceTimeGrid, model: ModelSpec, cfg: ParadinConfig | None = None):
    """Solve all levels at once.  Returns ``(U, stats)`` like ``run_sequential``.

    ``stats.history`` holds one record per global iteration with the RMS of
    the update over all levels and the RMS of the residual it corrected.
    """
    cfg = cfg or ParadinConfig()
    start = time.perf_counter()
    workers = cfg.worker_count() if cfg.executor == "pool" else 1
    timing = TimingReport(executor=cfg.executor, workers=workers)
    u0 = exact_field(grid, model, 0.0)

    t0 = time.perf_counter()
    U = coarse_initial_guess(grid, model, cfg.coarsening_factor, cfg.newton)
    timing.initial_guess = time.perf_counter() - t0

    pool = WorkerPool(grid.ns, workers) if cfg.executor == "pool" else None
    history: list[IterationRecord] = []
    tol, norms = cfg.newton.tolerance, []
    dU = np.zeros_like(U)
    try:
        for k in range(1, cfg.newton.max_iterations + 1):
            levels = NewtonLevels(grid, model, U, u0)
            try:
                if pool is None:
                    t0 = time.perf_counter()
                    jac, res = levels.jacobians(), levels.residuals()
                    timing.jacobian_assembly += time.perf_counter() - t0
                    system = build_decoupled(jac, res, cfg.pivot_floor, timing)
                    t0 = time.perf_counter()
                    dU = solve_decoupled(system, cfg.preconditioning, cfg.pivot_floor)
                    timing.level_solve += time.perf_counter() - t0
                else:
                    system = pool.build_decoupled(levels, cfg.pivot_floor, timing)
                    t0 = time.perf_counter()
                    dU = pool.solve_levels(system, cfg.preconditioning, cfg.pivot_floor)
                    timing.level_solve += time.perf_counter() - t0
            except (ZeroDiagonal, SingularPivot) as exc:
                raise _breakdown(grid, model, exc) from exc
            # the pool keeps residual rows distributed; recompute them for the record
            r_norm = rms(np.concatenate(res if pool is None else levels.residuals()))
            U = U + dU
            eta = rms(dU)
            norms.append(eta)
            history.append(IterationRecord(k, eta, r_norm))
            if not np.isfinite(eta) or eta > cfg.newton.divergence_factor * max(norms[0], tol):
                raise NewtonDiverged(f"global Newton diverged: update norms {norms}", None, norms)
            if eta <= tol:
                break
        else:
            raise NewtonDiverged(
                f"global Newton did not reach {tol:.2e} in {cfg.newton.max_iterations} iterations", None, norms
            )
    finally:
        if pool is not None:
            pool.close()

    timing.iterations = len(history)
    timing.total = time.perf_counter() - start
    stats = SolveStats(
        [len(history)] * grid.nt,
        timing.total,
        [rms(d) for d in dU],
        history=history,
        timing=timing,
    )
    return U, stats
