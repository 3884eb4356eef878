"""Time marching: one Newton solve per level, level after level."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .banded import band_lu_solve
from .discretization import SpaceTimeGrid, assemble_jacobian, exact_field, step_residual
from .errors import NewtonDiverged
from .models import ModelSpec


@dataclass(frozen=True)
class NewtonConfig:
    tolerance: float = 1e-10
    max_iterations: int = 20
    divergence_factor: float = 1e6

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("Newton tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class IterationRecord:
    iteration: int
    update_norm: float
    residual_norm: float


@dataclass
class SolveStats:
    iterations_per_level: list[int]
    wall_time_s: float
    final_update_norms: list[float]
    # global Newton history for all-at-once runs; per-level histories for marching
    history: list[IterationRecord] = field(default_factory=list)
    level_histories: list[list[float]] = field(default_factory=list)
    timing: object | None = None

    @property
    def iterations(self) -> int:
        return max(self.iterations_per_level) if self.iterations_per_level else 0

    @property
    def mean_iterations(self) -> float:
        return float(np.mean(self.iterations_per_level)) if self.iterations_per_level else 0.0


def rms(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.sqrt(np.mean(v * v))) if v.size else 0.0


def advance_step(
    grid: SpaceTimeGrid,
    model: ModelSpec,
    u_prev,
    t_n: float,
    cfg: NewtonConfig,
    tau: float | None = None,
    level: int | None = None,
    history: list | None = None,
):
    """Newton solve of one backward Euler step starting from ``u_prev``.

    Returns ``(u_n, iterations)``.  The stopping test is the RMS of the
    Newton update.  Update norms are appended to ``history`` if given.
    """
    u_prev = np.asarray(u_prev, dtype=float)
    u = u_prev.copy()
    norms = []
    for k in range(1, cfg.max_iterations + 1):
        a = assemble_jacobian(grid, model, u, t_n, tau)
        r = step_residual(grid, model, u, u_prev, t_n, tau)
        du = band_lu_solve(a, r)
        u = u + du
        eta = rms(du)
        norms.append(eta)
        if history is not None:
            history.append(eta)
        if not np.isfinite(eta) or eta > cfg.divergence_factor * max(norms[0], cfg.tolerance):
            raise NewtonDiverged(f"Newton diverged at level {level}: update norms {norms}", level, norms)
        if eta <= cfg.tolerance:
            return u, k
    raise NewtonDiverged(
        f"Newton did not reach {cfg.tolerance:.2e} in {cfg.max_iterations} iterations at level {level}",
        level,
        norms,
    )


def run_sequential(grid: SpaceTimeGrid, model: ModelSpec, cfg: NewtonConfig | None = None):
    """March levels 1..nt from the exact initial condition.

    Returns ``(U, stats)`` with ``U`` of shape ``(nt, ns)``; the initial
    condition itself is not part of ``U``.
    """
    cfg = cfg or NewtonConfig()
    start = time.perf_counter()
    u = exact_field(grid, model, 0.0)
    levels = np.empty((grid.nt, grid.ns))
    iterations, finals, histories = [], [], []
    for n in range(1, grid.nt + 1):
        hist: list[float] = []
        u, k = advance_step(grid, model, u, grid.time(n), cfg, level=n, history=hist)
        levels[n - 1] = u
        iterations.append(k)
        finals.append(hist[-1])
        histories.append(hist)
    stats = SolveStats(iterations, time.perf_counter() - start, finals, level_histories=histories)
    stats.history = global_history(histories, grid.ns)
    return levels, stats


def global_history(level_histories: list[list[float]], ns: int) -> list[IterationRecord]:
    """Combine per-level update norms into the all-levels RMS per iteration.

    Levels that have already converged contribute zero.
    """
    nt = len(level_histories)
    depth = max((len(h) for h in level_histories), default=0)
    out = []
    for k in range(depth):
        sq = sum(h[k] ** 2 for h in level_histories if len(h) > k)
        out.append(IterationRecord(k + 1, float(np.sqrt(sq / nt)), float("nan")))
    return out
