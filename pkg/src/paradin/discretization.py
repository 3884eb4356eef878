"""Backward Euler in time, second-order central differences in space.

Unknowns live at the interior nodes of a uniform ``nx`` x ``ny`` interval
grid and are numbered along x first::

    l(j, i) = (j - 1) * (nx - 1) + (i - 1),   i = 1..nx-1, j = 1..ny-1

Boundary nodes carry Dirichlet data from the model's exact solution.  A
single time level is a flat array of ``ns`` values; all levels together
form an ``(nt, ns)`` array.

The Newton matrix of one level is ``A = I + tau dF/du``, a five-diagonal
banded matrix with offsets ``0, +-1, +-(nx - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .banded import BandedMatrix
from .errors import DimensionMismatch
from .models import (
    Domain,
    ModelSpec,
    exact_solution,
    face_viscosity_and_partials,
    inviscid_flux,
    inviscid_flux_derivative,
)


@dataclass(frozen=True)
class SpaceTimeGrid:
    nx: int
    ny: int
    nt: int
    domain: Domain
    t_final: float = 1.0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2 or self.nt < 1:
            raise ValueError(f"grid needs nx, ny >= 2 and nt >= 1, got {self.nt}x{self.nx}x{self.ny}")

    @classmethod
    def for_model(cls, model: ModelSpec, nt: int, nx: int, ny: int | None = None) -> "SpaceTimeGrid":
        return cls(nx, nx if ny is None else ny, nt, model.domain, model.t_final)

    @property
    def hx(self) -> float:
        return (self.domain.x_r - self.domain.x_l) / self.nx

    @property
    def hy(self) -> float:
        return (self.domain.y_r - self.domain.y_l) / self.ny

    @property
    def tau(self) -> float:
        return self.t_final / self.nt

    @property
    def mx(self) -> int:
        return self.nx - 1

    @property
    def my(self) -> int:
        return self.ny - 1

    @property
    def ns(self) -> int:
        return self.mx * self.my

    def time(self, n: int) -> float:
        return self.t_final * n / self.nt

    @property
    def times(self) -> np.ndarray:
        """t_0 .. t_nt."""
        return self.t_final * np.arange(self.nt + 1) / self.nt

    @property
    def x_nodes(self) -> np.ndarray:
        return self.domain.x_l + self.hx * np.arange(self.nx + 1)

    @property
    def y_nodes(self) -> np.ndarray:
        return self.domain.y_l + self.hy * np.arange(self.ny + 1)

    def index(self, j: int, i: int) -> int:
        return (j - 1) * self.mx + (i - 1)

    @cached_property
    def interior_xy(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates of the unknowns in linear-index order."""
        x, y = np.meshgrid(self.x_nodes[1:-1], self.y_nodes[1:-1], indexing="xy")
        return x.ravel(), y.ravel()

    def coarsened(self, factor: int) -> "SpaceTimeGrid":
        if self.nx % factor or self.ny % factor or self.nt % factor:
            raise ValueError(f"coarsening factor {factor} does not divide {self.nt}x{self.nx}x{self.ny}")
        coarse = SpaceTimeGrid(self.nx // factor, self.ny // factor, self.nt // factor, self.domain, self.t_final)
        return coarse

    def label(self) -> str:
        return f"{self.nt}x{self.nx}x{self.ny}"


def exact_field(grid: SpaceTimeGrid, model: ModelSpec, t: float) -> np.ndarray:
    x, y = grid.interior_xy
    return np.asarray(exact_solution(model, x, y, t), dtype=float)


def exact_global(grid: SpaceTimeGrid, model: ModelSpec) -> np.ndarray:
    return np.stack([exact_field(grid, model, grid.time(n)) for n in range(1, grid.nt + 1)])


def padded_state(grid: SpaceTimeGrid, model: ModelSpec, u, t: float) -> np.ndarray:
    """Full ``(ny+1, nx+1)`` node array: unknowns inside, boundary data on the rim."""
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.ns,):
        raise DimensionMismatch(f"field has shape {u.shape}, grid needs ({grid.ns},)")
    xs, ys = grid.x_nodes, grid.y_nodes
    w = np.empty((grid.ny + 1, grid.nx + 1))
    w[0, :] = exact_solution(model, xs, ys[0], t)
    w[-1, :] = exact_solution(model, xs, ys[-1], t)
    w[:, 0] = exact_solution(model, xs[0], ys, t)
    w[:, -1] = exact_solution(model, xs[-1], ys, t)
    w[1:-1, 1:-1] = u.reshape(grid.my, grid.mx)
    return w


class _Stencil:
    """Per-node stencil quantities for the unknowns ``lo:hi``."""

    def __init__(self, grid: SpaceTimeGrid, model: ModelSpec, w: np.ndarray, lo: int, hi: int):
        ell = np.arange(lo, hi)
        j = ell // grid.mx + 1
        i = ell % grid.mx + 1
        self.i, self.j = i, j
        self.up = w[j, i]
        self.ue = w[j, i + 1]
        self.uw = w[j, i - 1]
        self.un = w[j + 1, i]
        self.us = w[j - 1, i]
        # faces: (left node, right node) ordering
        self.mu_e, self.a_e, self.b_e = face_viscosity_and_partials(model, self.up, self.ue)
        self.mu_w, self.a_w, self.b_w = face_viscosity_and_partials(model, self.uw, self.up)
        self.mu_n, self.a_n, self.b_n = face_viscosity_and_partials(model, self.up, self.un)
        self.mu_s, self.a_s, self.b_s = face_viscosity_and_partials(model, self.us, self.up)
        self.d_e = self.ue - self.up
        self.d_w = self.up - self.uw
        self.d_n = self.un - self.up
        self.d_s = self.up - self.us


def _operator_rows(grid, model, w, lo, hi):
    s = _Stencil(grid, model, w, lo, hi)
    hx, hy = grid.hx, grid.hy
    conv = (inviscid_flux(model, s.ue) - inviscid_flux(model, s.uw)) / (2 * hx) + (
        inviscid_flux(model, s.un) - inviscid_flux(model, s.us)
    ) / (2 * hy)
    visc = (s.mu_e * s.d_e - s.mu_w * s.d_w) / hx**2 + (s.mu_n * s.d_n - s.mu_s * s.d_s) / hy**2
    return conv - visc


def spatial_operator(grid: SpaceTimeGrid, model: ModelSpec, u, t: float) -> np.ndarray:
    """F(u) - q: the discrete flux divergence minus viscous terms, with
    boundary neighbours taken from the Dirichlet data at time ``t``."""
    w = padded_state(grid, model, u, t)
    return _operator_rows(grid, model, w, 0, grid.ns)


def step_residual_rows(grid, model, u_n, u_prev, t_n, lo, hi, tau=None) -> np.ndarray:
    tau = grid.tau if tau is None else tau
    w = padded_state(grid, model, u_n, t_n)
    u_n = np.asarray(u_n, dtype=float)
    u_prev = np.asarray(u_prev, dtype=float)
    return -((u_n[lo:hi] - u_prev[lo:hi]) + tau * _operator_rows(grid, model, w, lo, hi))


def step_residual(grid: SpaceTimeGrid, model: ModelSpec, u_n, u_prev, t_n: float, tau: float | None = None):
    """Newton right-hand side of one level, already multiplied by tau:
    ``-[(u_n - u_prev) + tau * (F(u_n) - q)]``."""
    if np.shape(u_prev) != (grid.ns,):
        raise DimensionMismatch("previous level has the wrong length")
    return step_residual_rows(grid, model, u_n, u_prev, t_n, 0, grid.ns, tau)


def jacobian_offsets(grid: SpaceTimeGrid) -> list[int]:
    return sorted({0, 1, -1, grid.mx, -grid.mx} & set(range(-grid.ns + 1, grid.ns)))


def assemble_jacobian_rows(grid, model, u_n, t_n, lo, hi, tau=None) -> BandedMatrix:
    """Rows ``lo:hi`` of ``I + tau dF/du``; all other rows are zero."""
    tau = grid.tau if tau is None else tau
    w = padded_state(grid, model, u_n, t_n)
    s = _Stencil(grid, model, w, lo, hi)
    hx2, hy2 = grid.hx**2, grid.hy**2
    fe = inviscid_flux_derivative(model, s.ue) / (2 * grid.hx)
    fw = inviscid_flux_derivative(model, s.uw) / (2 * grid.hx)
    fn = inviscid_flux_derivative(model, s.un) / (2 * grid.hy)
    fs = inviscid_flux_derivative(model, s.us) / (2 * grid.hy)

    d_east = fe - (s.b_e * s.d_e + s.mu_e) / hx2
    d_west = -fw + (s.a_w * s.d_w - s.mu_w) / hx2
    d_north = fn - (s.b_n * s.d_n + s.mu_n) / hy2
    d_south = -fs + (s.a_s * s.d_s - s.mu_s) / hy2
    d_centre = -(s.a_e * s.d_e - s.mu_e - s.b_w * s.d_w - s.mu_w) / hx2 - (
        s.a_n * s.d_n - s.mu_n - s.b_s * s.d_s - s.mu_s
    ) / hy2

    offsets = jacobian_offsets(grid)
    data = np.zeros((len(offsets), grid.ns))
    row = {d: k for k, d in enumerate(offsets)}
    data[row[0], lo:hi] = 1.0 + tau * d_centre
    # couplings to boundary nodes are dropped; their data sits in q
    for off, coef, inside in (
        (1, d_east, s.i < grid.mx),
        (-1, d_west, s.i > 1),
        (grid.mx, d_north, s.j < grid.my),
        (-grid.mx, d_south, s.j > 1),
    ):
        if inside.any():
            data[row[off], lo:hi] += np.where(inside, tau * coef, 0.0)
    return BandedMatrix(grid.ns, offsets, data, check=False)


def assemble_jacobian(grid: SpaceTimeGrid, model: ModelSpec, u_n, t_n: float, tau: float | None = None):
    return assemble_jacobian_rows(grid, model, u_n, t_n, 0, grid.ns, tau)
