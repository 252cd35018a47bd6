"""Least-informative prior densities and their transformation rules.

All priors are improper and returned unnormalised, up to the scale
constant ``a`` (default 1).  A density is always taken with respect to the
coordinate differentials of the parametrization it is tagged with; in
particular ``"polar"`` means ``d(beta) d(cos theta) d(phi)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy import integrate

from .core import (
    CartesianVelocity,
    PolarVelocity,
    _check_finite,
    check_speed,
    one_minus_beta2,
    speed,
)
from .errors import DivergenceError, DomainError, NumericError, SingularPointError
from .geometry import ball_volume, classical_ball_volume
from .kinematics import polar_boost

Parametrization = Literal["cartesian1d", "cartesian3d", "polar", "rapidity", "energy"]

SINGULAR_DET = 1e-300
FD_REL_STEP = 1e-6
QUAD_RTOL = 1e-10


def _check_scale(scale) -> float:
    scale = float(scale)
    if not np.isfinite(scale) or scale <= 0:
        raise DomainError(f"scale must be a positive finite number, got {scale!r}")
    return scale


@dataclass(frozen=True)
class DensityValue:
    value: float
    parametrization: Parametrization
    scale: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.value) and self.value >= 0):
            raise NumericError(f"density must be finite and >= 0, got {self.value!r}")

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class EnergyPoint:
    """Total energy ``E`` of a particle with rest energy ``E0`` (same units)."""

    E: float
    E0: float = 1.0

    def __post_init__(self):
        _check_finite([self.E, self.E0], ("E", "E0"))
        if self.E0 <= 0:
            raise DomainError(f"rest energy must be > 0, got {self.E0!r}")
        if self.E < self.E0:
            raise DomainError(f"E = {self.E!r} is below the rest energy {self.E0!r}")

    @property
    def beta(self) -> float:
        return float(energy_to_beta(self.E, self.E0))


# --------------------------------------------------------------------------
# array kernels


def density_1d(beta, scale=1.0):
    """``a / (1 - beta^2)`` for collinear motion."""
    beta = np.asarray(beta, dtype=float)
    return scale / ((1.0 - beta) * (1.0 + beta))


def density_polar(beta, scale=1.0):
    """``a beta^2 / (1 - beta^2)^2`` w.r.t. ``d(beta) d(cos theta) d(phi)``."""
    beta = np.asarray(beta, dtype=float)
    return scale * beta**2 / ((1.0 - beta) * (1.0 + beta)) ** 2


def density_cartesian(xyz, scale=1.0):
    """``a / (1 - |beta|^2)^2`` w.r.t. ``d(bx) d(by) d(bz)``."""
    return scale / one_minus_beta2(xyz) ** 2


def beta_to_energy(beta, E0=1.0):
    beta = np.asarray(beta, dtype=float)
    return E0 / np.sqrt((1.0 - beta) * (1.0 + beta))


def energy_to_beta(E, E0=1.0):
    """Speed ``sqrt(1 - (E0/E)^2) >= 0``, written to avoid cancellation near E0."""
    E = np.asarray(E, dtype=float)
    return np.sqrt((E - E0) * (E + E0)) / E


def density_energy(E, E0=1.0, scale=1.0):
    """Pushforward of the collinear prior to energy, ``a / sqrt(E^2 - E0^2)``.

    Only the ``beta >= 0`` branch is mapped, since E does not see the sign
    of the velocity.
    """
    E = np.asarray(E, dtype=float)
    return scale / np.sqrt((E - E0) * (E + E0))


# --------------------------------------------------------------------------
# public priors


def prior_classical(point: CartesianVelocity, scale: float = 1.0) -> DensityValue:
    """Uniform improper prior on classical velocity space (any dimension)."""
    if point.mode != "classical":
        raise DomainError("prior_classical needs a classical velocity")
    tag = "cartesian1d" if point.ndim == 1 else "cartesian3d"
    return DensityValue(_check_scale(scale), tag, scale)


def prior_relativistic_1d(beta: float, scale: float = 1.0) -> DensityValue:
    beta = float(check_speed(beta))
    scale = _check_scale(scale)
    return DensityValue(float(density_1d(beta, scale)), "cartesian1d", scale)


def prior_relativistic_polar(p: PolarVelocity, scale: float = 1.0) -> DensityValue:
    if p.mode != "relativistic":
        raise DomainError("prior_relativistic_polar needs a relativistic velocity")
    scale = _check_scale(scale)
    return DensityValue(float(density_polar(p.beta, scale)), "polar", scale)


def prior_relativistic_cartesian(v: CartesianVelocity, scale: float = 1.0) -> DensityValue:
    if v.mode != "relativistic":
        raise DomainError("prior_relativistic_cartesian needs a relativistic velocity")
    scale = _check_scale(scale)
    return DensityValue(float(density_cartesian(v.array, scale)), "cartesian3d", scale)


def prior_relativistic_rapidity(b: float, scale: float = 1.0) -> DensityValue:
    """Collinear prior in rapidity coordinates: flat."""
    _check_finite([b], ("rapidity",))
    scale = _check_scale(scale)
    return DensityValue(scale, "rapidity", scale)


def prior_relativistic_energy(point: EnergyPoint, scale: float = 1.0) -> DensityValue:
    scale = _check_scale(scale)
    if point.E == point.E0:
        raise DivergenceError("the energy prior diverges at the rest energy")
    return DensityValue(float(density_energy(point.E, point.E0, scale)), "energy", scale)


# --------------------------------------------------------------------------
# reparametrization


def fd_step(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.maximum(FD_REL_STEP, FD_REL_STEP * np.abs(x))


def fd_jacobian(f: Callable, x) -> np.ndarray:
    """Central-difference Jacobian of ``f: R^n -> R^m`` at ``x``.

    The step for coordinate i is ``max(1e-6, 1e-6 |x_i|)``; truncation error
    is O(h^2).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = fd_step(x)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        cols.append((np.atleast_1d(f(x + e)) - np.atleast_1d(f(x - e))) / (2.0 * h[i]))
    return np.stack(cols, axis=-1)


def reparametrize_density(
    density_fn: Callable,
    inverse: Callable,
    point_new,
    jacobian: Callable | None = None,
    parametrization: Parametrization | None = None,
) -> DensityValue:
    """Density in new coordinates ``y = T(x)`` from the density in ``x``.

    Conservation of probability gives ``f_y(y) = f_x(T^-1(y)) |det dT^-1/dy|``.

    Parameters
    ----------
    density_fn : callable
        Maps an old-coordinate point to a density (float or DensityValue).
    inverse : callable
        ``T^-1``, mapping new coordinates back to old ones.
    point_new : float or array
        Point in the new coordinates.
    jacobian : callable, optional
        Analytic ``dT^-1/dy`` at ``point_new`` (matrix or determinant).  A
        central finite-difference Jacobian is used when omitted.
    parametrization : str, optional
        Tag of the new coordinates.  Defaults to the input tag.
    """
    point_new = np.asarray(point_new, dtype=float)
    J = jacobian(point_new) if jacobian is not None else fd_jacobian(inverse, point_new)
    J = np.asarray(J, dtype=float)
    det = abs(float(np.linalg.det(J))) if J.ndim == 2 else abs(float(J))
    if not det >= SINGULAR_DET:
        raise NumericError(f"singular Jacobian (|det| = {det!r}) at {point_new}")
    old = density_fn(inverse(point_new))
    scale = old.scale if isinstance(old, DensityValue) else 1.0
    tag = parametrization or (old.parametrization if isinstance(old, DensityValue) else "cartesian3d")
    return DensityValue(float(old) * det, tag, scale)


# --------------------------------------------------------------------------
# boost Jacobian in the polar chart


def polar_boost_jacobian_array(beta, cos_theta, alpha):
    """Closed-form ``|J|`` of the polar boost map.

    Equal to ``[b^2/(1-b^2)^2] / [b'^2/(1-b'^2)^2]``.  With
    ``1 - b'^2 = (1-b^2)(1-a^2)/(1-a b c)^2`` it simplifies to
    ``b^2 (1-a^2)^2 / ((1-a b c)^2 Q)`` where ``Q = (b')^2 (1-a b c)^2``.
    """
    beta, cos_theta, alpha = (np.asarray(t, dtype=float) for t in (beta, cos_theta, alpha))
    d = 1.0 - alpha * beta * cos_theta
    g = (1.0 - alpha) * (1.0 + alpha)
    q = (beta * cos_theta - alpha) ** 2 + beta**2 * ((1.0 - cos_theta) * (1.0 + cos_theta)) * g
    with np.errstate(divide="ignore", invalid="ignore"):
        return beta**2 * g**2 / (d**2 * q)


def polar_boost_partials(beta, cos_theta, alpha):
    """Matrix ``d(beta', cos') / d(beta, cos)`` from explicit partial derivatives.

    ``phi`` passes through unchanged, so this 2x2 block carries the whole
    determinant.  Shape ``(..., 2, 2)``.
    """
    b, c, a = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (beta, cos_theta, alpha)))
    g = (1.0 - a) * (1.0 + a)
    d = 1.0 - a * b * c
    u = b * c - a
    q = u**2 + b**2 * (1.0 - c * c) * g
    s = np.sqrt(q)
    dq_db = 2.0 * c * u + 2.0 * b * (1.0 - c * c) * g
    dq_dc = 2.0 * b * u - 2.0 * b * b * c * g
    ds_db, ds_dc = dq_db / (2.0 * s), dq_dc / (2.0 * s)
    dd_db, dd_dc = -a * c, -a * b
    dbp_db = ds_db / d - s * dd_db / d**2
    dbp_dc = ds_dc / d - s * dd_dc / d**2
    dcp_db = c / s - u * ds_db / q
    dcp_dc = b / s - u * ds_dc / q
    return np.stack([np.stack([dbp_db, dbp_dc], -1), np.stack([dcp_db, dcp_dc], -1)], -2)


def polar_boost_jacobian(p: PolarVelocity, alpha: float) -> float:
    """``|J|`` of the boost map on ``(beta, cos_theta, phi)`` at ``p``."""
    check_speed(alpha, "alpha")
    if p.beta == 0:
        raise SingularPointError("the polar chart is singular at beta = 0")
    b_new, _, _ = polar_boost(p.beta, p.cos_theta, p.phi, alpha)
    if b_new == 0:
        raise SingularPointError("boost into the particle rest frame: beta' = 0")
    return float(polar_boost_jacobian_array(p.beta, p.cos_theta, alpha))


# --------------------------------------------------------------------------
# region measures


@dataclass(frozen=True)
class Ball:
    """Velocities with speed at most ``radius`` (centred at rest)."""

    radius: float


@dataclass(frozen=True)
class Box:
    """Axis-aligned coordinate box ``lower <= x <= upper`` componentwise."""

    lower: tuple[float, float, float]
    upper: tuple[float, float, float]


def volume_density(xyz, model="relativistic", scale=1.0):
    """Invariant volume element ``sqrt(det g)`` in Cartesian coordinates.

    ``a^3`` classically and ``a^3 / (1 - |beta|^2)^2`` relativistically.
    """
    if model == "classical":
        return np.full(np.shape(xyz)[:-1], scale**3)
    return density_cartesian(xyz, scale**3)


def region_measure(
    model: str,
    region: Ball | Box,
    scale: float = 1.0,
    pullback: Callable | None = None,
    pullback_jacobian: Callable | None = None,
) -> float:
    """Invariant volume of a region of velocity space.

    For a ``pullback`` map ``P`` the measure of ``P(region)`` is computed
    instead, by the change of variables
    ``int_region vol(P(y)) |det dP/dy| dy``.  The determinant comes from
    ``pullback_jacobian`` when given, else from central differences.
    Boxes are integrated adaptively to a relative tolerance of 1e-10.
    """
    scale = _check_scale(scale)
    if model not in ("classical", "relativistic"):
        raise DomainError(f"unknown model {model!r}")
    if isinstance(region, Ball) and pullback is None:
        if model == "classical":
            return classical_ball_volume(region.radius, scale)
        if region.radius >= 1:
            raise DivergenceError("the invariant volume diverges at |beta| = 1")
        return ball_volume(region.radius, scale)
    if not isinstance(region, Box):
        raise DomainError("pullbacks are supported for boxes only")

    lo, hi = np.asarray(region.lower, dtype=float), np.asarray(region.upper, dtype=float)
    _check_finite(np.concatenate([lo, hi]), ("lower", "lower", "lower", "upper", "upper", "upper"))
    if lo.shape != (3,) or hi.shape != (3,):
        raise DomainError("box bounds need 3 components each")
    if np.any(hi < lo):
        raise DomainError("box upper bound below lower bound")
    if np.any(hi == lo):
        return 0.0
    if model == "relativistic" and pullback is None:
        corner = np.maximum(np.abs(lo), np.abs(hi))
        if float(speed(corner)) >= 1:
            raise DivergenceError("box reaches |beta| >= 1 where the invariant volume diverges")

    def integrand(y):
        # cubature passes shape (npoints, 3)
        if pullback is None:
            return volume_density(y, model, scale)
        x = pullback(y)
        if model == "relativistic" and np.any(speed(x) >= 1):
            raise DivergenceError("pulled-back region reaches |beta| >= 1")
        if pullback_jacobian is not None:
            det = np.abs(pullback_jacobian(y))
        else:
            det = np.abs(np.linalg.det(_fd_jacobian_rows(pullback, y)))
        return volume_density(x, model, scale) * det

    res = integrate.cubature(integrand, lo, hi, rtol=QUAD_RTOL, atol=0.0)
    if res.status != "converged":
        raise NumericError(f"quadrature did not converge (estimate {res.estimate!r}, error {res.error!r})")
    return float(res.estimate)


def _fd_jacobian_rows(f: Callable, y) -> np.ndarray:
    """Central-difference Jacobians of a map on rows of ``y``; shape ``(n, 3, 3)``."""
    y = np.asarray(y, dtype=float)
    h = fd_step(y)
    cols = []
    for i in range(y.shape[-1]):
        e = np.zeros_like(y)
        e[..., i] = h[..., i]
        cols.append((f(y + e) - f(y - e)) / (2.0 * h[..., i : i + 1]))
    return np.stack(cols, axis=-1)
