"""Frame changes: Galilean and Lorentz velocity addition.

Lorentz boosts are primitive only along the x axis.  A boost in another
direction is ``R.T @ boost_x(R @ v)`` with ``R`` rotating the boost
direction onto x (see :func:`rotation_to_x`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    CartesianVelocity,
    Mode,
    PolarVelocity,
    _check_finite,
    check_speed,
    clamp_ball,
    clamp_speed,
    check_velocity,
    from_polar,
    speed,
    to_polar,
)
from .errors import DomainError

ROTATION_TOL = 1e-12


def check_rotation(R) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        raise DomainError(f"rotation must be a finite 3x3 matrix, got shape {R.shape}")
    if np.max(np.abs(R.T @ R - np.eye(3))) > ROTATION_TOL:
        raise DomainError("rotation is not orthogonal (R^T R != I)")
    if abs(np.linalg.det(R) - 1.0) > ROTATION_TOL:
        raise DomainError("rotation has determinant != +1")
    return R


@dataclass(frozen=True)
class Boost:
    """Frame change by relative velocity ``alpha`` followed by a rotation.

    Relativistic boosts take a scalar ``alpha`` along x with ``|alpha| < 1``.
    Classical boosts accept a scalar (taken along x) or a 3-vector ``v_r``.
    """

    alpha: float | tuple[float, float, float]
    rotation: np.ndarray | None = field(default=None, compare=False)
    mode: Mode = "relativistic"

    def __post_init__(self):
        if self.mode == "relativistic":
            if np.ndim(self.alpha) != 0:
                raise DomainError("relativistic boosts are along x; alpha must be a scalar")
            check_speed(self.alpha, "alpha")
        else:
            _check_finite(np.atleast_1d(self.alpha), ("v_r",))
        if self.rotation is not None:
            object.__setattr__(self, "rotation", check_rotation(self.rotation))

    @property
    def relative_velocity(self) -> np.ndarray:
        a = np.asarray(self.alpha, dtype=float)
        if a.ndim == 0:
            return np.array([float(a), 0.0, 0.0])
        if a.shape != (3,):
            raise DomainError(f"v_r must have 3 components, got {a.shape}")
        return a

    @property
    def matrix(self) -> np.ndarray:
        return np.eye(3) if self.rotation is None else self.rotation


# --------------------------------------------------------------------------
# Galilean


def galilean_boost_1d(v, v_r):
    """Velocity seen from a frame moving at ``v_r``: ``v - v_r``."""
    _check_finite(np.atleast_1d(v), ("v",))
    _check_finite(np.atleast_1d(v_r), ("v_r",))
    out = np.subtract(v, v_r)
    return out if np.ndim(out) else float(out)


def galilean_boost_3d(v: CartesianVelocity, boost: Boost) -> CartesianVelocity:
    """``R (v - v_r)``; an isometry of Euclidean velocity space (Jacobian 1)."""
    if v.mode != "classical":
        raise DomainError("galilean_boost_3d needs a classical velocity")
    return CartesianVelocity(boost.matrix @ (v.array - boost.relative_velocity), mode="classical")


# --------------------------------------------------------------------------
# Lorentz, 1D


def lorentz_boost_1d(beta, alpha):
    """Collinear velocity addition ``(beta - alpha) / (1 - alpha beta)``."""
    beta = check_speed(beta)
    alpha = check_speed(alpha, "alpha")
    out = clamp_speed((beta - alpha) / (1.0 - alpha * beta))
    return out if out.ndim else float(out)


def compose_boosts(alpha1, alpha2):
    """Single boost equivalent to boosting by ``alpha1`` then ``alpha2``."""
    alpha1 = check_speed(alpha1, "alpha1")
    alpha2 = check_speed(alpha2, "alpha2")
    out = clamp_speed((alpha1 + alpha2) / (1.0 + alpha1 * alpha2))
    return out if out.ndim else float(out)


def inverse_boost(alpha):
    alpha = check_speed(alpha, "alpha")
    out = -alpha
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# Lorentz, 3D along x


def boost_x(xyz, alpha):
    """Array version of :func:`lorentz_boost_3d`; ``xyz`` has shape ``(..., 3)``."""
    xyz = np.asarray(xyz, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    d = 1.0 - alpha * xyz[..., 0]
    k = np.sqrt((1.0 - alpha) * (1.0 + alpha)) / d
    return np.stack([(xyz[..., 0] - alpha) / d, xyz[..., 1] * k, xyz[..., 2] * k], axis=-1)


def boost_x_jacobian_det(xyz, alpha):
    """Determinant of ``d(boost_x)/d(bx, by, bz)`` from its partial derivatives.

    The first output row depends on bx only, so the matrix is triangular
    up to column order and the determinant is the product
    ``(1 - a^2)/(1 - a bx)^2 * [sqrt(1 - a^2)/(1 - a bx)]^2``.
    """
    xyz = np.asarray(xyz, dtype=float)
    g = (1.0 - alpha) * (1.0 + alpha)
    d = 1.0 - alpha * xyz[..., 0]
    return (g / d**2) * (g / d**2)


def lorentz_boost_3d(v: CartesianVelocity, alpha: float) -> CartesianVelocity:
    """Velocity seen from a frame moving at ``alpha`` along x."""
    if v.mode != "relativistic":
        raise DomainError("lorentz_boost_3d needs a relativistic velocity")
    check_speed(alpha, "alpha")
    return CartesianVelocity(clamp_ball(boost_x(v.array, alpha)))


def rotation_to_x(direction) -> np.ndarray:
    """Proper rotations ``R`` with ``R @ direction`` along +x; shape ``(..., 3, 3)``.

    A Householder reflection sends the unit direction to -x (when it points
    into x >= 0) or to +x (otherwise), whichever keeps the reflection
    vector well away from zero.  A second reflection restores det = +1 and
    the +x orientation.  Zero directions give the identity.
    """
    n = np.asarray(direction, dtype=float)
    norm = speed(n)
    safe = np.where(norm > 0, norm, 1.0)
    n = np.where((norm > 0)[..., None], n / safe[..., None], np.array([1.0, 0.0, 0.0]))
    forward = n[..., 0] >= 0
    sign = np.where(forward, 1.0, -1.0)
    w = n.copy()
    w[..., 0] += sign
    ww = np.sum(w * w, axis=-1)
    H = np.eye(3) - 2.0 * w[..., :, None] * w[..., None, :] / ww[..., None, None]
    fix = np.where(forward[..., None], np.array([-1.0, 1.0, 1.0]), np.array([1.0, 1.0, -1.0]))
    R = fix[..., :, None] * H
    return np.where((norm > 0)[..., None, None], R, np.eye(3))


def boost_along(xyz, velocity):
    """Boost ``xyz`` into the frame moving with ``velocity`` (any direction).

    Rows of ``xyz`` and ``velocity`` broadcast against each other.
    """
    velocity = check_velocity(velocity)
    a = speed(velocity)
    R = rotation_to_x(velocity)
    x = np.asarray(xyz, dtype=float)
    rotated = np.einsum("...ij,...j->...i", R, x)
    return np.einsum("...ji,...j->...i", R, boost_x(rotated, a))


# --------------------------------------------------------------------------
# polar chart


def polar_boost(beta, cos_theta, phi, alpha):
    """Array version of :func:`polar_lorentz_boost`; returns ``(beta', cos', phi')``.

    The radicand ``(1 - a b c)^2 - (1 - b^2)(1 - a^2)`` is evaluated as the
    equal sum of squares ``(b c - a)^2 + b^2 (1 - c^2)(1 - a^2)``, which
    cannot go negative.  At ``beta' = 0`` the direction is canonicalised to
    ``cos' = 1``.
    """
    beta, cos_theta, phi, alpha = (np.asarray(t, dtype=float) for t in (beta, cos_theta, phi, alpha))
    d = 1.0 - alpha * beta * cos_theta
    along = beta * cos_theta - alpha
    root = np.sqrt(along**2 + beta**2 * ((1.0 - cos_theta) * (1.0 + cos_theta)) * ((1.0 - alpha) * (1.0 + alpha)))
    beta_p = root / d
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_p = np.where(root > 0, along / np.where(root > 0, root, 1.0), 1.0)
    cos_p = np.clip(cos_p, -1.0, 1.0)
    return beta_p, cos_p, phi + np.zeros_like(beta_p)


def polar_lorentz_boost(p: PolarVelocity, alpha: float) -> PolarVelocity:
    """Boost ``(beta, cos_theta, phi)`` along the polar axis; ``phi`` is unchanged."""
    if p.mode != "relativistic":
        raise DomainError("polar_lorentz_boost needs a relativistic velocity")
    check_speed(alpha, "alpha")
    b, c, f = polar_boost(p.beta, p.cos_theta, p.phi, alpha)
    return PolarVelocity(float(clamp_speed(b)), float(c), float(f))


def polar_boost_via_cartesian(beta, cos_theta, phi, alpha):
    """Reference route for :func:`polar_boost` through the Cartesian boost."""
    return to_polar(boost_x(from_polar(beta, cos_theta, phi), alpha))
