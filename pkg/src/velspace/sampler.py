"""Seeded sampling from the invariant measure on bounded regions.

Randomness comes from numpy's Philox, a counter-based generator.  Draw
``i`` of a stream consumes exactly one Philox block (four 64-bit words),
so any slice of the stream can be produced on its own by advancing the
counter; chunked or parallel generation reproduces the sequential result
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from numpy.random import Philox

from .core import CartesianVelocity, Mode, _check_finite, beta_to_rapidity, from_polar
from .errors import DomainError
from .geometry import _sinh_minus_x

WORDS_PER_DRAW = 4
BISECTION_TOL = 1e-12
DEFAULT_CHUNK = 1 << 16


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def uniforms(seed: int, start: int, count: int, stream: int = 0) -> np.ndarray:
    """Uniform doubles in [0, 1) for draws ``start .. start + count - 1``.

    Returns shape ``(count, 4)``; row ``i`` depends only on
    ``(seed, stream, start + i)``.
    """
    bitgen = Philox(key=np.array([_check_seed(seed), int(stream)], dtype=np.uint64))
    if start:
        bitgen.advance(int(start))
    raw = bitgen.random_raw(WORDS_PER_DRAW * int(count)).reshape(int(count), WORDS_PER_DRAW)
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def chunked_uniforms(seed: int, count: int, stream: int = 0, chunk: int = DEFAULT_CHUNK) -> np.ndarray:
    """Same as ``uniforms(seed, 0, count, stream)``, generated chunk by chunk."""
    blocks = [uniforms(seed, s, min(chunk, count - s), stream) for s in range(0, count, chunk)]
    return np.concatenate(blocks) if blocks else np.empty((0, WORDS_PER_DRAW))


@dataclass(frozen=True, eq=False)
class SampleBatch:
    points: np.ndarray
    seed: int
    beta_max: float
    mode: Mode = "relativistic"
    n: int = field(init=False)

    def __post_init__(self):
        self.points.setflags(write=False)
        object.__setattr__(self, "n", len(self.points))

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[CartesianVelocity]:
        for p in self.points:
            yield CartesianVelocity(p, mode=self.mode)


def radial_cdf(r, r_max):
    """CDF of the rapidity radius under the invariant measure on a ball."""
    return _sinh_minus_x(2.0 * np.asarray(r, dtype=float)) / _sinh_minus_x(2.0 * r_max)


def invert_radial_cdf(u, r_max, tol: float = BISECTION_TOL) -> np.ndarray:
    """Solve ``radial_cdf(r) = u`` on ``[0, r_max]`` by vectorised bisection."""
    u = np.asarray(u, dtype=float)
    lo = np.zeros_like(u)
    hi = np.full_like(u, r_max)
    n_iter = int(np.ceil(np.log2(max(r_max, tol) / tol))) + 1
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        below = radial_cdf(mid, r_max) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _directions(u1, u2):
    """Uniform directions on the sphere from two uniforms."""
    return from_polar(1.0, 2.0 * u1 - 1.0, 2.0 * np.pi * u2)


def _check_n(n) -> int:
    if int(n) != n or n < 0:
        raise DomainError(f"sample size must be a non-negative integer, got {n!r}")
    return int(n)


def sample_invariant_ball(beta_max: float, n: int, seed: int = 0) -> SampleBatch:
    """``n`` i.i.d. velocities uniform in invariant volume on ``{|beta| < beta_max}``.

    The direction is uniform on the sphere and the rapidity radius has
    density proportional to ``sinh(r)^2``, inverted numerically.
    """
    _check_finite([beta_max], ("beta_max",))
    if not 0 < beta_max < 1:
        raise DomainError(f"beta_max must lie in (0, 1), got {beta_max!r}")
    n = _check_n(n)
    seed = _check_seed(seed)
    u = chunked_uniforms(seed, n)
    r = invert_radial_cdf(u[:, 0], beta_to_rapidity(beta_max))
    beta = np.minimum(np.tanh(r), np.nextafter(beta_max, 0.0))
    points = beta[:, None] * _directions(u[:, 1], u[:, 2])
    return SampleBatch(points.reshape(n, 3), seed, float(beta_max))


def sample_classical_ball(v_max: float, n: int, seed: int = 0) -> SampleBatch:
    """``n`` velocities uniform in the Euclidean ball of radius ``v_max``."""
    _check_finite([v_max], ("v_max",))
    if not v_max > 0:
        raise DomainError(f"v_max must be > 0, got {v_max!r}")
    n = _check_n(n)
    seed = _check_seed(seed)
    u = chunked_uniforms(seed, n)
    radius = v_max * np.cbrt(u[:, 0])
    points = radius[:, None] * _directions(u[:, 1], u[:, 2])
    return SampleBatch(points.reshape(n, 3), seed, float(v_max), mode="classical")
