"""Invariant metrics on velocity space, volume elements and distances.

With ``beta = tanh r`` the relativistic metric becomes
``a^2 [dr^2 + sinh(r)^2 dOmega^2]``, hyperbolic 3-space of curvature
``-1/a^2``.  Distances and ball volumes below are the closed forms of that
geometry, evaluated in rapidity variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .core import CartesianVelocity, _check_finite, beta_to_rapidity, check_speed, check_velocity, one_minus_beta2, speed
from .errors import DivergenceError, DomainError, NumericError
from .kinematics import boost_along

Coords = Literal["cartesian", "polar"]

SYMMETRY_TOL = 1e-15


@dataclass(frozen=True, eq=False)
class MetricTensor:
    """Components ``g_ij`` of the metric at one point.

    ``degenerate`` marks chart singularities (zero speed, or the polar
    axis in polar coordinates) where some components vanish.
    """

    components: np.ndarray
    coords: Coords
    scale: float = 1.0
    degenerate: bool = field(default=False)

    def __post_init__(self):
        g = np.array(self.components, dtype=float)
        if g.shape != (3, 3):
            raise DomainError(f"metric must be 3x3, got shape {g.shape}")
        if np.max(np.abs(g - g.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(g))):
            raise NumericError("metric is not symmetric")
        g.setflags(write=False)
        object.__setattr__(self, "components", g)

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.components))


def _scale(scale) -> float:
    scale = float(scale)
    if not np.isfinite(scale) or scale <= 0:
        raise DomainError(f"scale must be a positive finite number, got {scale!r}")
    return scale


def metric_classical_polar(v: float, theta: float, scale: float = 1.0) -> MetricTensor:
    """Euclidean metric ``a^2 diag(1, v^2, v^2 sin^2 theta)`` in ``(v, theta, phi)``."""
    _check_finite([v, theta], ("v", "theta"))
    if v < 0:
        raise DomainError(f"speed must be >= 0, got {v!r}")
    a2 = _scale(scale) ** 2
    s2 = np.sin(theta) ** 2
    g = np.diag([a2, a2 * v * v, a2 * v * v * s2])
    return MetricTensor(g, "polar", scale, degenerate=bool(v == 0 or s2 == 0))


def metric_relativistic_polar(beta: float, theta: float, scale: float = 1.0) -> MetricTensor:
    """``a^2 diag(1/(1-b^2)^2, b^2/(1-b^2), b^2 sin^2 theta/(1-b^2))`` in ``(beta, theta, phi)``."""
    _check_finite([beta, theta], ("beta", "theta"))
    if beta < 0:
        raise DomainError(f"beta must be >= 0, got {beta!r}")
    check_speed(beta)
    a2 = _scale(scale) ** 2
    w = (1.0 - beta) * (1.0 + beta)
    s2 = np.sin(theta) ** 2
    g = np.diag([a2 / w**2, a2 * beta**2 / w, a2 * beta**2 * s2 / w])
    return MetricTensor(g, "polar", scale, degenerate=bool(beta == 0 or s2 == 0))


def cartesian_metric_array(xyz, scale=1.0) -> np.ndarray:
    """``a^2 [(1 - b^2) I + b b^T] / (1 - b^2)^2`` for rows of ``xyz``; shape ``(..., 3, 3)``."""
    xyz = np.asarray(xyz, dtype=float)
    w = one_minus_beta2(xyz)[..., None, None]
    outer = xyz[..., :, None] * xyz[..., None, :]
    return scale**2 * (w * np.eye(3) + outer) / w**2


def metric_relativistic_cartesian(v: CartesianVelocity, scale: float = 1.0) -> MetricTensor:
    if v.mode != "relativistic":
        raise DomainError("metric_relativistic_cartesian needs a relativistic velocity")
    return MetricTensor(cartesian_metric_array(v.array, _scale(scale)), "cartesian", scale)


def pullback(components, jacobian) -> np.ndarray:
    """Metric in new coordinates, ``J^T g J`` with ``J = d(old)/d(new)``."""
    J = np.asarray(jacobian, dtype=float)
    return np.swapaxes(J, -1, -2) @ np.asarray(components, dtype=float) @ J


def volume_element(g: MetricTensor) -> float:
    """``sqrt(det g)``."""
    det = g.determinant
    if det < 0:
        # round-off on a degenerate metric may leave a tiny negative value
        if det > -1e-14 * max(1.0, float(np.max(np.abs(g.components)))) ** 3:
            return 0.0
        raise NumericError(f"negative metric determinant {det!r}")
    return float(np.sqrt(det))


# --------------------------------------------------------------------------
# distances


def hyperbolic_distance(u, v, scale=1.0):
    """Geodesic distance between rows of ``u`` and ``v`` (relativistic).

    Hyperbolic law of cosines, rewritten without cancellation as
    ``sinh^2(d/2a) = sinh^2((r_u - r_v)/2) + sinh(r_u) sinh(r_v) sin^2(psi/2)``
    with ``r = arctanh|beta|`` and ``psi`` the angle between the velocities.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    bu, bv = speed(u), speed(v)
    ru, rv = np.asarray(beta_to_rapidity(bu)), np.asarray(beta_to_rapidity(bv))
    with np.errstate(invalid="ignore", divide="ignore"):
        nu = np.where(bu[..., None] > 0, u / np.where(bu > 0, bu, 1.0)[..., None], 0.0)
        nv = np.where(bv[..., None] > 0, v / np.where(bv > 0, bv, 1.0)[..., None], 0.0)
    half_sin2 = speed(nu - nv) ** 2 / 4.0
    s = np.sinh((ru - rv) / 2.0) ** 2 + np.sinh(ru) * np.sinh(rv) * half_sin2
    return scale * 2.0 * np.arcsinh(np.sqrt(s))


def geodesic_distance(u: CartesianVelocity, v: CartesianVelocity, scale: float = 1.0) -> float:
    """Invariant distance between two relativistic velocities."""
    for w in (u, v):
        if w.mode != "relativistic":
            raise DomainError("geodesic_distance needs relativistic velocities")
    return float(hyperbolic_distance(u.array, v.array, _scale(scale)))


def relative_rapidity_distance(u, v, scale=1.0):
    """Distance as the rapidity of ``v`` seen from the rest frame of ``u``.

    Independent of :func:`hyperbolic_distance`: boosts along ``u`` (a
    rotation onto x, an x boost, and the rotation back) and takes
    ``arctanh`` of the resulting speed.
    """
    u = check_velocity(u)
    v = check_velocity(v)
    return scale * beta_to_rapidity(speed(boost_along(v, u)))


def classical_distance(u: CartesianVelocity, v: CartesianVelocity, scale: float = 1.0) -> float:
    for w in (u, v):
        if w.mode != "classical":
            raise DomainError("classical_distance needs classical velocities")
    return float(_scale(scale) * speed(u.array - v.array))


# --------------------------------------------------------------------------
# volumes


def _sinh_minus_x(x):
    """``sinh(x) - x`` without cancellation for small ``x``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1.0
    xs = np.where(small, x, 0.0)
    term = xs**3 / 6.0
    total = term.copy()
    for k in range(2, 12):
        term = term * xs * xs / ((2 * k) * (2 * k + 1))
        total = total + term
    return np.where(small, total, np.sinh(x) - x)


def ball_volume(beta_max: float, scale: float = 1.0) -> float:
    """Invariant volume of ``{|beta| <= beta_max}``: ``a^3 pi (sinh 2r - 2r)``, ``r = arctanh beta_max``.

    Grows like ``pi e^{2r} / 2`` and diverges as ``beta_max -> 1``.
    """
    _check_finite([beta_max], ("beta_max",))
    if beta_max < 0:
        raise DomainError(f"beta_max must be >= 0, got {beta_max!r}")
    if beta_max >= 1:
        raise DivergenceError("the invariant volume of velocity space is infinite (beta_max >= 1)")
    r = beta_to_rapidity(beta_max)
    return float(_scale(scale) ** 3 * np.pi * _sinh_minus_x(2.0 * r))


def classical_ball_volume(v_max: float, scale: float = 1.0) -> float:
    _check_finite([v_max], ("v_max",))
    if v_max < 0:
        raise DomainError(f"v_max must be >= 0, got {v_max!r}")
    return float(_scale(scale) ** 3 * 4.0 / 3.0 * np.pi * v_max**3)
