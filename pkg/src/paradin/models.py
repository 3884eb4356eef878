"""Model PDEs: u_t + f(u)_x + g(u)_y = (mu(u) u_x)_x + (mu(u) u_y)_y.

Two benchmark problems are provided, the nonlinear heat equation
(f = g = 0, mu = mu0 u^2) and the 2-D viscous Burgers equation with equal
velocity components (f = g = u^2/2, mu = mu0).  Both come with closed-form
exact solutions that supply initial data, Dirichlet data and reference
values for error norms.  A ``custom`` kind accepts user callbacks and is
meant for tests.

All functions accept scalars or numpy arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ModelDomainError


class ModelKind(str, enum.Enum):
    NONLINEAR_HEAT = "heat"
    VISCOUS_BURGERS = "burgers"
    CUSTOM = "custom"


class FaceRule(str, enum.Enum):
    # mu evaluated at the average of the two nodal states
    STATE_MEAN = "state_mean"
    # average of the two nodal viscosities
    VISCOSITY_MEAN = "viscosity_mean"


@dataclass(frozen=True)
class Domain:
    x_l: float
    x_r: float
    y_l: float
    y_r: float

    def __post_init__(self):
        if not (self.x_l < self.x_r and self.y_l < self.y_r):
            raise ValueError(f"degenerate domain {self}")


@dataclass(frozen=True)
class ModelSpec:
    kind: ModelKind
    mu0: float
    domain: Domain
    t_final: float = 1.0
    alpha: float = 1.0
    shock_speed: float = 0.5
    face_rule: FaceRule = FaceRule.STATE_MEAN
    # custom-kind callbacks; ignored for the built-in models
    flux_fn: Callable | None = None
    flux_derivative_fn: Callable | None = None
    viscosity_fn: Callable | None = None
    viscosity_derivative_fn: Callable | None = None
    exact_fn: Callable | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "face_rule", FaceRule(self.face_rule))
        if self.t_final <= 0:
            raise ValueError("t_final must be positive")
        if self.mu0 < 0:
            raise ValueError("mu0 must be non-negative")
        if self.kind is ModelKind.VISCOUS_BURGERS and self.mu0 <= 0:
            raise ValueError("the viscous Burgers model needs mu0 > 0")
        if self.kind is ModelKind.NONLINEAR_HEAT:
            if self.mu0 <= 0 or self.alpha <= 0:
                raise ValueError("the nonlinear heat model needs mu0 > 0 and alpha > 0")
            d = self.domain
            for x in (d.x_l, d.x_r):
                for y in (d.y_l, d.y_r):
                    for t in (0.0, self.t_final):
                        if _heat_radicand(self, x, y, t) <= 0:
                            raise ModelDomainError(
                                f"heat exact solution undefined at corner ({x}, {y}, t={t})"
                            )

    @property
    def name(self) -> str:
        return self.kind.value

    def with_face_rule(self, rule: FaceRule | str) -> "ModelSpec":
        from dataclasses import replace

        return replace(self, face_rule=FaceRule(rule))


def nonlinear_heat(
    mu0: float = 1e-6,
    alpha: float = 1.0,
    domain: Domain = Domain(0.1, 1.1, 0.1, 1.1),
    t_final: float = 1.0,
    face_rule: FaceRule | str = FaceRule.STATE_MEAN,
) -> ModelSpec:
    return ModelSpec(ModelKind.NONLINEAR_HEAT, mu0, domain, t_final, alpha=alpha, face_rule=face_rule)


def viscous_burgers(
    mu0: float = 1e-3,
    shock_speed: float = 0.5,
    domain: Domain = Domain(-0.25, 0.75, -0.25, 0.75),
    t_final: float = 1.0,
    face_rule: FaceRule | str = FaceRule.STATE_MEAN,
) -> ModelSpec:
    """Burgers benchmark.  The default domain centres the moving shock
    x + y = v t over t in [0, 1]."""
    return ModelSpec(
        ModelKind.VISCOUS_BURGERS, mu0, domain, t_final, shock_speed=shock_speed, face_rule=face_rule
    )


def custom_model(
    flux=None,
    flux_derivative=None,
    viscosity=None,
    viscosity_derivative=None,
    exact=None,
    domain: Domain = Domain(0.0, 1.0, 0.0, 1.0),
    t_final: float = 1.0,
    face_rule: FaceRule | str = FaceRule.STATE_MEAN,
) -> ModelSpec:
    """Model from callbacks.  Missing callbacks default to zero."""
    zero = lambda u: np.zeros_like(np.asarray(u, dtype=float))
    return ModelSpec(
        ModelKind.CUSTOM,
        0.0,
        domain,
        t_final,
        face_rule=face_rule,
        flux_fn=flux or zero,
        flux_derivative_fn=flux_derivative or zero,
        viscosity_fn=viscosity or zero,
        viscosity_derivative_fn=viscosity_derivative or zero,
        exact_fn=exact or (lambda x, y, t: np.zeros(np.broadcast(x, y, t).shape)),
    )


def _heat_radicand(model: ModelSpec, x, y, t):
    return np.sqrt(model.alpha / model.mu0) * (np.asarray(x) + np.asarray(y)) + model.alpha * np.asarray(t) + 1.0


def inviscid_flux(model: ModelSpec, u):
    u = np.asarray(u, dtype=float)
    if model.kind is ModelKind.NONLINEAR_HEAT:
        return np.zeros_like(u)
    if model.kind is ModelKind.VISCOUS_BURGERS:
        return 0.5 * u * u
    return np.asarray(model.flux_fn(u), dtype=float)


def inviscid_flux_derivative(model: ModelSpec, u):
    u = np.asarray(u, dtype=float)
    if model.kind is ModelKind.NONLINEAR_HEAT:
        return np.zeros_like(u)
    if model.kind is ModelKind.VISCOUS_BURGERS:
        return u.copy()
    return np.asarray(model.flux_derivative_fn(u), dtype=float)


def viscosity(model: ModelSpec, u):
    u = np.asarray(u, dtype=float)
    if model.kind is ModelKind.NONLINEAR_HEAT:
        return model.mu0 * u * u
    if model.kind is ModelKind.VISCOUS_BURGERS:
        return np.full_like(u, model.mu0)
    return np.asarray(model.viscosity_fn(u), dtype=float)


def viscosity_derivative(model: ModelSpec, u):
    u = np.asarray(u, dtype=float)
    if model.kind is ModelKind.NONLINEAR_HEAT:
        return 2.0 * model.mu0 * u
    if model.kind is ModelKind.VISCOUS_BURGERS:
        return np.zeros_like(u)
    return np.asarray(model.viscosity_derivative_fn(u), dtype=float)


def exact_solution(model: ModelSpec, x, y, t):
    if model.kind is ModelKind.NONLINEAR_HEAT:
        w = _heat_radicand(model, x, y, t)
        if np.any(w <= 0):
            raise ModelDomainError("heat exact solution radicand is not positive")
        return np.sqrt(w)
    if model.kind is ModelKind.VISCOUS_BURGERS:
        v, mu = model.shock_speed, model.mu0
        s = np.asarray(x) + np.asarray(y) - v * np.asarray(t)
        return 0.5 * v * (1.0 - np.tanh(v * s / (4.0 * mu)))
    return np.asarray(model.exact_fn(x, y, t), dtype=float)


def face_viscosity(model: ModelSpec, u_left, u_right):
    """Viscosity at the face between two nodes."""
    return face_viscosity_and_partials(model, u_left, u_right)[0]


def face_viscosity_and_partials(model: ModelSpec, u_left, u_right):
    """Return (mu_face, d mu_face / d u_left, d mu_face / d u_right)."""
    u_left = np.asarray(u_left, dtype=float)
    u_right = np.asarray(u_right, dtype=float)
    if model.face_rule is FaceRule.STATE_MEAN:
        um = 0.5 * (u_left + u_right)
        d = 0.5 * viscosity_derivative(model, um)
        return viscosity(model, um), d, d
    mu = 0.5 * (viscosity(model, u_left) + viscosity(model, u_right))
    return mu, 0.5 * viscosity_derivative(model, u_left), 0.5 * viscosity_derivative(model, u_right)


def characteristic_viscosity(model: ModelSpec) -> float:
    """Largest nodal viscosity of the initial state on the domain corners."""
    d = model.domain
    u = exact_solution(model, np.array([d.x_l, d.x_r, d.x_l, d.x_r]), np.array([d.y_l, d.y_l, d.y_r, d.y_r]), 0.0)
    return float(np.max(viscosity(model, u)))
