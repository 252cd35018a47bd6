"""Velocity representations, coordinate conversions and domain checks.

Relativistic velocities are dimensionless fractions of c.  The polar chart
follows the convention used throughout the package, with the polar axis
along x::

    bx = beta * cos(theta)
    by = beta * sin(theta) * sin(phi)
    bz = beta * sin(theta) * cos(phi)

Every function works on plain floats or numpy arrays; the dataclasses are
thin validated wrappers used at the public boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError

Mode = Literal["classical", "relativistic"]

TWO_PI = 2.0 * np.pi
COMPONENT_NAMES = {
    "relativistic": ("bx", "by", "bz"),
    "classical": ("vx", "vy", "vz"),
}
# 1 - |beta| below this is accepted but reported as precision-degraded.
LIGHTLIKE_GUARD = 1e-12


def _check_finite(values, names) -> None:
    values = np.asarray(values, dtype=float)
    if values.ndim == 0:
        if not np.isfinite(values):
            raise DomainError(f"{names[0]} is not finite: {float(values)!r}")
        return
    bad = ~np.isfinite(values)
    if bad.any():
        idx = np.argwhere(bad)[0]
        name = names[idx[-1]] if idx[-1] < len(names) else f"component {idx[-1]}"
        raise DomainError(f"{name} is not finite: {float(values[tuple(idx)])!r}")


def check_speed(beta, name: str = "beta") -> np.ndarray:
    """Validate scalar speeds ``|beta| < 1`` and return them as an array."""
    beta = np.asarray(beta, dtype=float)
    _check_finite(beta, (name,))
    if np.any(np.abs(beta) >= 1.0):
        worst = beta.flat[np.argmax(np.abs(beta))]
        raise DomainError(f"superluminal or lightlike {name}: |{name}| = {float(abs(worst))!r} >= 1")
    return beta


def check_velocity(xyz, mode: Mode = "relativistic") -> np.ndarray:
    """Validate Cartesian velocities of shape ``(..., 3)``."""
    xyz = np.asarray(xyz, dtype=float)
    if xyz.shape[-1:] != (3,):
        raise DomainError(f"expected 3 velocity components, got shape {xyz.shape}")
    names = COMPONENT_NAMES[mode]
    _check_finite(xyz, names)
    if mode == "relativistic":
        beta2 = np.sum(xyz * xyz, axis=-1)
        if np.any(beta2 >= 1.0):
            i = np.unravel_index(np.argmax(beta2), beta2.shape)
            comps = ", ".join(f"{n}={float(c)!r}" for n, c in zip(names, xyz[i]))
            raise DomainError(
                f"superluminal or lightlike velocity ({comps}): |beta| = {float(np.sqrt(beta2[i]))!r} >= 1"
            )
    return xyz


def speed(xyz) -> np.ndarray:
    """Euclidean norm of the last axis without overflow or underflow."""
    xyz = np.asarray(xyz, dtype=float)
    return np.hypot(np.hypot(xyz[..., 0], xyz[..., 1]), xyz[..., 2])


def one_minus_beta2(xyz):
    """``1 - |beta|^2`` from Cartesian components."""
    xyz = np.asarray(xyz, dtype=float)
    return 1.0 - np.sum(xyz * xyz, axis=-1)


# largest speeds kept for results that round onto the light cone
_MAX_SPEED = np.nextafter(1.0, 0.0)
_MAX_NORM = 1.0 - 2.0**-50


def clamp_speed(beta):
    """Pull computed speeds that rounded to ``|beta| >= 1`` back inside."""
    beta = np.asarray(beta, dtype=float)
    return np.where(np.abs(beta) >= 1.0, np.copysign(_MAX_SPEED, beta), beta)


def clamp_ball(xyz):
    """Rescale computed velocities that rounded onto or past the unit sphere."""
    xyz = np.asarray(xyz, dtype=float)
    out = np.sum(xyz * xyz, axis=-1) >= 1.0
    if not np.any(out):
        return xyz
    norm = speed(xyz)
    factor = np.where(out, _MAX_NORM / np.where(out, norm, 1.0), 1.0)
    return xyz * factor[..., None]


def is_precision_degraded(beta) -> bool:
    """True when any speed lies within ``LIGHTLIKE_GUARD`` of 1."""
    return bool(np.any(1.0 - np.abs(np.asarray(beta, dtype=float)) < LIGHTLIKE_GUARD))


# --------------------------------------------------------------------------
# array-level charts


def to_polar(xyz):
    """Cartesian ``(..., 3)`` -> ``(beta, cos_theta, phi)`` arrays.

    Degenerate directions are canonicalised: zero speed gives
    ``cos_theta = 1, phi = 0`` and a velocity on the x axis gives ``phi = 0``.
    """
    xyz = np.asarray(xyz, dtype=float)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    transverse = np.hypot(y, z)
    beta = np.hypot(x, transverse)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_theta = np.where(beta > 0, x / np.where(beta > 0, beta, 1.0), 1.0)
    cos_theta = np.clip(cos_theta, -1.0, 1.0)
    phi = np.arctan2(y, z) % TWO_PI
    phi = np.where((transverse == 0) | (phi >= TWO_PI), 0.0, phi)
    return beta, cos_theta, phi


def from_polar(beta, cos_theta, phi):
    """``(beta, cos_theta, phi)`` -> Cartesian array of shape ``(..., 3)``."""
    beta, cos_theta, phi = np.broadcast_arrays(
        np.asarray(beta, dtype=float), np.asarray(cos_theta, dtype=float), np.asarray(phi, dtype=float)
    )
    sin_theta = np.sqrt((1.0 - cos_theta) * (1.0 + cos_theta))
    return np.stack(
        [beta * cos_theta, beta * sin_theta * np.sin(phi), beta * sin_theta * np.cos(phi)], axis=-1
    )


def polar_jacobian(beta, cos_theta=None, phi=None):
    """Jacobian ``|d(bx, by, bz) / d(beta, cos_theta, phi)|``, which is ``beta**2``."""
    return np.asarray(beta, dtype=float) ** 2


# --------------------------------------------------------------------------
# rapidity


def beta_to_rapidity(beta):
    """Rapidity ``arctanh(beta)`` for ``|beta| < 1``.

    Written as ``sign(beta) * log1p(2|beta| / (1 - |beta|)) / 2`` so that the
    ratio (1 + beta) / (1 - beta) never loses digits near the light cone.
    """
    beta = check_speed(beta)
    a = np.abs(beta)
    r = np.copysign(0.5 * np.log1p(2.0 * a / (1.0 - a)), beta)
    return r if r.ndim else float(r)


def rapidity_to_beta(b):
    """Inverse of :func:`beta_to_rapidity`, i.e. ``tanh(b)``."""
    b = np.asarray(b, dtype=float)
    _check_finite(b, ("rapidity",))
    out = np.tanh(b)
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class CartesianVelocity:
    """A 1-, 2- or 3-component velocity, stored padded to three components.

    In relativistic mode the components are fractions of c and must lie
    strictly inside the unit ball; classical velocities are unbounded.
    """

    components: tuple[float, float, float]
    mode: Mode = "relativistic"
    ndim: int = 3

    def __init__(self, components, mode: Mode = "relativistic"):
        if mode not in COMPONENT_NAMES:
            raise DomainError(f"unknown mode {mode!r}")
        comps = tuple(float(c) for c in np.atleast_1d(np.asarray(components, dtype=float)))
        if not 1 <= len(comps) <= 3:
            raise DomainError(f"a velocity has 1 to 3 components, got {len(comps)}")
        padded = comps + (0.0,) * (3 - len(comps))
        check_velocity(padded, mode)
        object.__setattr__(self, "components", padded)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "ndim", len(comps))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.components)

    @property
    def speed(self) -> float:
        return float(speed(self.array))

    @property
    def precision_degraded(self) -> bool:
        return self.mode == "relativistic" and is_precision_degraded(self.speed)


@dataclass(frozen=True)
class PolarVelocity:
    """Speed and direction ``(beta, cos_theta, phi)`` with the polar axis along x."""

    beta: float
    cos_theta: float = 1.0
    phi: float = 0.0
    mode: Mode = "relativistic"

    def __post_init__(self):
        _check_finite([self.beta, self.cos_theta, self.phi], ("beta", "cos_theta", "phi"))
        if self.beta < 0:
            raise DomainError(f"beta must be >= 0, got {self.beta!r}")
        if self.mode == "relativistic" and self.beta >= 1:
            raise DomainError(f"superluminal or lightlike beta = {self.beta!r} >= 1")
        if not -1.0 <= self.cos_theta <= 1.0:
            raise DomainError(f"cos_theta must lie in [-1, 1], got {self.cos_theta!r}")
        if not 0.0 <= self.phi < TWO_PI:
            raise DomainError(f"phi must lie in [0, 2pi), got {self.phi!r}")

    @property
    def theta(self) -> float:
        return float(np.arccos(self.cos_theta))


@dataclass(frozen=True)
class Rapidity:
    """Rapidity ``r = arctanh|beta|`` with a unit direction (x by default).

    A one-dimensional signed rapidity is ``Rapidity(b)``; negative values
    are folded into the direction.
    """

    value: float
    direction: tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        _check_finite([self.value], ("rapidity",))
        n = np.asarray(self.direction, dtype=float)
        norm = float(speed(n))
        if n.shape != (3,) or not np.isfinite(norm) or abs(norm - 1.0) > 1e-12:
            raise DomainError(f"rapidity direction must be a unit 3-vector, got {self.direction}")

    @classmethod
    def from_velocity(cls, v: CartesianVelocity) -> "Rapidity":
        b = v.speed
        if b == 0:
            return cls(0.0)
        return cls(beta_to_rapidity(b), tuple(v.array / b))

    def to_velocity(self) -> CartesianVelocity:
        return CartesianVelocity(rapidity_to_beta(self.value) * np.asarray(self.direction))


def cartesian_to_polar(v: CartesianVelocity) -> PolarVelocity:
    """Convert to ``(beta, cos_theta, phi)``, canonicalising degenerate angles."""
    beta, c, phi = to_polar(v.array)
    return PolarVelocity(float(beta), float(c), float(phi), mode=v.mode)


def polar_to_cartesian(p: PolarVelocity) -> CartesianVelocity:
    return CartesianVelocity(from_polar(p.beta, p.cos_theta, p.phi), mode=p.mode)
