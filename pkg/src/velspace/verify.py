"""Randomised invariance checks with a machine-readable report.

Each check draws its randomness from its own Philox stream keyed by
``(seed, check index)``; trial ``i`` uses counter block ``i`` of that
stream, so results do not depend on how the work is split up.

Errors are relative where the reference magnitude exceeds 1e-6 and
absolute otherwise.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.spatial.transform import Rotation

from .core import beta_to_rapidity, from_polar, speed
from .errors import DomainError, VelspaceError
from .geometry import ball_volume, cartesian_metric_array, hyperbolic_distance, relative_rapidity_distance
from .kinematics import boost_x, boost_x_jacobian_det, lorentz_boost_1d, polar_boost
from .measures import (
    Box,
    density_1d,
    density_cartesian,
    density_polar,
    polar_boost_jacobian_array,
    polar_boost_partials,
    region_measure,
)
from .sampler import sample_invariant_ball, uniforms

SUITES = (
    "jacobian",
    "prior_invariance",
    "metric_prior",
    "isometry",
    "rapidity_flat",
    "classical_limit",
    "nonfactorization",
    "mc_invariance",
    "volume_divergence",
)

DEFAULT_TOL = {
    "jacobian": 1e-10,
    "prior_invariance": 1e-10,
    "metric_prior": 1e-12,
    "isometry": 1e-9,
    "rapidity_flat": 1e-10,
    "classical_limit": 1e-5,
    "nonfactorization": 1e-12,
    "mc_invariance": 4.0,
    "volume_divergence": 1e-10,
}

# fixed secondary bounds
FD_JACOBIAN_TOL = 1e-6
FD_REL_STEP = 1e-6
ROTATION_TOL = 1e-12
CROSS_CHECK_TOL = 1e-10
ADDITIVITY_TOL = 1e-12
CLASSICAL_BOUND = 2.1
MC_SAMPLES = 100_000
MC_BETA_MAX = 0.9
MC_ALPHA = 0.3
MC_SIGMA = 4.0

BETA_HI = 0.99
ALPHA_HI = 0.99
REL_FLOOR = 1e-6


@dataclass(frozen=True)
class CheckConfig:
    suite: tuple[str, ...] = SUITES
    trials: int = 10_000
    tol: float | None = None
    seed: int = 0

    def __post_init__(self):
        suite = tuple(self.suite)
        unknown = [s for s in suite if s not in SUITES]
        if unknown:
            raise DomainError(f"unknown check(s): {', '.join(unknown)}")
        if not suite:
            raise DomainError("empty suite")
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials!r}")
        if self.tol is not None and not (np.isfinite(self.tol) and self.tol > 0):
            raise DomainError(f"tol must be positive, got {self.tol!r}")
        # report order is the canonical suite order
        object.__setattr__(self, "suite", tuple(s for s in SUITES if s in suite))

    def tolerance(self, check: str) -> float:
        # statistical bounds are in units of sigma and are never overridden
        if self.tol is None or check == "mc_invariance":
            return DEFAULT_TOL[check]
        return float(self.tol)


@dataclass
class CheckResult:
    check: str
    passed: bool
    trials: int
    max_error: float
    tol: float
    seconds: float = 0.0
    details: dict = field(default_factory=dict)
    error: str | None = None

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "check": self.check,
            "pass": self.passed,
            "trials": self.trials,
            "max_error": _json_float(self.max_error),
            "tol": self.tol,
        }
        if timing:
            out["seconds"] = self.seconds
        if self.details:
            out["details"] = {k: _json_float(v) for k, v in self.details.items()}
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class VerificationReport:
    config: CheckConfig
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "pass": self.passed,
            "seed": self.config.seed,
            "trials": self.config.trials,
            "checks": [c.to_dict(timing) for c in self.checks],
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2)


def _json_float(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if np.isfinite(x) else None


def rel_error(actual, reference) -> np.ndarray:
    actual = np.asarray(actual, dtype=float)
    reference = np.asarray(reference, dtype=float)
    diff = np.abs(actual - reference)
    mag = np.abs(reference)
    return np.where(mag > REL_FLOOR, diff / np.where(mag > REL_FLOOR, mag, 1.0), diff)


def _max(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return 0.0
    # NaN propagates so that a broken computation can never pass
    return float(np.max(x)) if not np.isnan(x).any() else float("nan")


class _Draws:
    """Per-trial uniforms for one check: ``next()`` yields a fresh ``(trials,)`` column."""

    def __init__(self, seed: int, check: str, trials: int):
        self._seed = seed
        self._base = 16 * SUITES.index(check)
        self._trials = trials
        self._cols: list[np.ndarray] = []
        self._blocks = 0

    def next(self) -> np.ndarray:
        if not self._cols:
            stream = self._base + self._blocks
            self._cols = list(uniforms(self._seed, 0, self._trials, stream).T)
            self._blocks += 1
        return self._cols.pop(0)

    def polar(self):
        """``(beta, cos_theta, phi)`` with ``beta ~ U(0, 0.99)``."""
        return BETA_HI * self.next(), 2.0 * self.next() - 1.0, 2.0 * np.pi * self.next()

    def alpha(self):
        return ALPHA_HI * (2.0 * self.next() - 1.0)

    def rotations(self) -> np.ndarray:
        """Uniform random rotation matrices from three uniforms per trial."""
        u1, u2, u3 = self.next(), self.next(), self.next()
        q = np.stack(
            [
                np.sqrt(1 - u1) * np.sin(2 * np.pi * u2),
                np.sqrt(1 - u1) * np.cos(2 * np.pi * u2),
                np.sqrt(u1) * np.sin(2 * np.pi * u3),
                np.sqrt(u1) * np.cos(2 * np.pi * u3),
            ],
            axis=-1,
        )
        return Rotation.from_quat(q).as_matrix()


# --------------------------------------------------------------------------
# independent references


def polar_map_with_complements(beta, cos_theta, alpha):
    """The polar boost map, plus its outputs measured from the nearby poles.

    Returns ``(beta', 1 - beta', cos', 1 - |cos'|)``.  The complements come
    from the exact identities ``1 - beta'^2 = (1-b^2)(1-a^2)/D^2`` and
    ``1 - cos'^2 = b^2 (1-c^2)(1-a^2)/R``, so they keep full relative
    precision where ``beta'`` or ``|cos'|`` is within rounding of 1.  No
    clipping is applied and the map may be evaluated just past ``|c| = 1``.
    """
    b, c, a = beta, cos_theta, alpha
    d = 1.0 - a * b * c
    g = (1.0 - a) * (1.0 + a)
    transverse = b**2 * ((1.0 - c) * (1.0 + c)) * g
    R = (b * c - a) ** 2 + transverse
    root = np.sqrt(R)
    beta_p = root / d
    cos_p = (b * c - a) / root
    one_minus_beta = (1.0 - b) * (1.0 + b) * g / (d * d * (1.0 + beta_p))
    one_minus_cos = transverse / (R * (1.0 + np.abs(cos_p)))
    return beta_p, one_minus_beta, cos_p, one_minus_cos


def _pow2_step(scale):
    # power-of-two steps keep x +/- h exact
    return np.exp2(np.floor(np.log2(FD_REL_STEP * np.minimum(1.0, scale))))


def fd_polar_jacobian(beta, cos_theta, alpha) -> np.ndarray:
    """Central-difference determinant of the polar boost map (phi passes through).

    Steps are 1e-6 times the distance to the nearest chart singularity
    (beta = 0 or 1, cos = +-1) capped at 1, and outputs within 0.5 of a
    pole are differenced through their complements.
    """
    hb = _pow2_step(np.minimum(beta, 1.0 - beta))
    hc = _pow2_step(1.0 - np.abs(cos_theta))
    beta_p, _, cos_p, _ = polar_map_with_complements(beta, cos_theta, alpha)
    cols = []
    for db, dc, h in ((hb, 0.0, hb), (0.0, hc, hc)):
        hi = polar_map_with_complements(beta + db, cos_theta + dc, alpha)
        lo = polar_map_with_complements(beta - db, cos_theta - dc, alpha)
        diff = [(x - y) / (2.0 * h) for x, y in zip(hi, lo)]
        d_beta = np.where(beta_p <= 0.5, diff[0], -diff[1])
        d_cos = np.where(np.abs(cos_p) <= 0.5, diff[2], -np.sign(cos_p) * diff[3])
        cols.append((d_beta, d_cos))
    (j11, j21), (j12, j22) = cols
    return np.abs(j11 * j22 - j12 * j21)


def ball_volume_quadrature(beta_max: float, scale: float = 1.0) -> float:
    """``4 pi a^3 int_0^R sinh(s)^2 ds`` by adaptive quadrature."""
    R = float(beta_to_rapidity(beta_max))
    val, _ = integrate.quad(lambda s: np.sinh(s) ** 2, 0.0, R, epsabs=0.0, epsrel=1e-13, limit=200)
    return 4.0 * np.pi * scale**3 * val


# --------------------------------------------------------------------------
# checks; each returns (max_error, extra_ok, trials_run, details)


def check_jacobian(draws: _Draws, trials: int, tol: float):
    beta, c, phi = draws.polar()
    alpha = draws.alpha()
    beta_p, _, _ = polar_boost(beta, c, phi, alpha)
    J = np.abs(np.linalg.det(polar_boost_partials(beta, c, alpha)))
    identity_err = rel_error(density_polar(beta_p) * J, density_polar(beta))
    fd_err = rel_error(polar_boost_jacobian_array(beta, c, alpha), fd_polar_jacobian(beta, c, alpha))
    fd_max = _max(fd_err)
    return _max(identity_err), fd_max <= FD_JACOBIAN_TOL, trials, {"fd_max_error": fd_max, "fd_tol": FD_JACOBIAN_TOL}


def check_prior_invariance(draws: _Draws, trials: int, tol: float):
    beta, c, phi = draws.polar()
    alpha = draws.alpha()
    beta_p, _, _ = polar_boost(beta, c, phi, alpha)
    lhs = density_polar(beta_p) * polar_boost_jacobian_array(beta, c, alpha)
    return _max(rel_error(lhs, density_polar(beta))), True, trials, {}


def check_metric_prior(draws: _Draws, trials: int, tol: float):
    xyz = from_polar(*draws.polar())
    vol = np.sqrt(np.linalg.det(cartesian_metric_array(xyz)))
    ratio = vol / density_cartesian(xyz)
    spread = float((ratio.max() - ratio.min()) / np.median(ratio))
    spot = np.array([0.6, 0.0, 0.0])
    spot_vol = float(np.sqrt(np.linalg.det(cartesian_metric_array(spot))))
    spot_prior = float(density_cartesian(spot))
    spot_err = max(abs(spot_vol - 2.44140625), abs(spot_prior - 2.44140625)) / 2.44140625
    return spread, spot_err <= 1e-14, trials, {"spot_volume_element": spot_vol, "spot_prior": spot_prior}


def check_isometry(draws: _Draws, trials: int, tol: float):
    u = from_polar(*draws.polar())
    v = from_polar(*draws.polar())
    alpha = draws.alpha()
    R = draws.rotations()
    d0 = hyperbolic_distance(u, v)
    d_boost = hyperbolic_distance(boost_x(u, alpha), boost_x(v, alpha))
    rot = lambda w: np.einsum("nij,nj->ni", R, w)  # noqa: E731
    d_rot = hyperbolic_distance(rot(u), rot(v))
    boost_err = _max(np.abs(d_boost - d0))
    rot_err = _max(np.abs(d_rot - d0))
    cross_err = _max(rel_error(relative_rapidity_distance(u, v), d0))
    ok = rot_err <= ROTATION_TOL and cross_err <= CROSS_CHECK_TOL
    return boost_err, ok, trials, {
        "rotation_max_error": rot_err,
        "rotation_tol": ROTATION_TOL,
        "cross_check_max_error": cross_err,
        "cross_check_tol": CROSS_CHECK_TOL,
    }


def check_rapidity_flat(draws: _Draws, trials: int, tol: float):
    b = np.linspace(-5.0, 5.0, trials)
    # pushforward with the analytic Jacobian d(beta)/db = 1/cosh(b)^2
    pushed = density_1d(np.tanh(b)) / np.cosh(b) ** 2
    flat_err = _max(np.abs(pushed - 1.0))
    beta = ALPHA_HI * (2.0 * draws.next() - 1.0)
    alpha = draws.alpha()
    lhs = beta_to_rapidity(lorentz_boost_1d(beta, alpha))
    rhs = beta_to_rapidity(beta) - beta_to_rapidity(alpha)
    add_err = _max(rel_error(lhs, rhs))
    return flat_err, add_err <= ADDITIVITY_TOL, trials, {"additivity_max_error": add_err, "additivity_tol": ADDITIVITY_TOL}


def check_classical_limit(draws: _Draws, trials: int, tol: float):
    beta, c, phi = draws.polar()
    beta = beta / BETA_HI * 1e-3
    xyz = from_polar(beta, c, phi)
    metric_err = np.max(np.abs(cartesian_metric_array(xyz) - np.eye(3)), axis=(-1, -2))
    prior_err = np.abs(density_cartesian(xyz) - 1.0)
    dist_err = np.abs(hyperbolic_distance(np.zeros_like(xyz), xyz) / beta - 1.0)
    dev = _max(np.maximum(np.maximum(metric_err, prior_err), dist_err))
    # explicit second-order bound on the prior for beta <= 0.1
    wide = from_polar(0.1 * draws.next(), c, phi)
    b2 = speed(wide) ** 2
    ratio = _max((density_cartesian(wide) - 1.0) / np.where(b2 > 0, b2, 1.0))
    return dev, ratio <= CLASSICAL_BOUND, trials, {"bound_ratio": ratio, "bound": CLASSICAL_BOUND}


def check_nonfactorization(draws: _Draws, trials: int, tol: float):
    witness = np.array([0.5, 0.5, 0.0])
    joint = float(density_cartesian(witness))
    product = float(np.prod(density_1d(witness)))
    a1 = 1.7
    classical_joint = a1**3
    classical_product = a1 * a1 * a1
    err = max(abs(joint - 4.0) / 4.0, abs(product - 16.0 / 9.0) * 9.0 / 16.0, abs(classical_joint - classical_product))
    return err, joint != product, 1, {
        "joint": joint,
        "product_of_1d": product,
        "classical_joint": classical_joint,
        "classical_product": classical_product,
    }


MC_BOXES = (
    ((-0.3, -0.3, -0.3), (0.3, 0.3, 0.3)),
    ((0.0, -0.2, -0.2), (0.4, 0.2, 0.2)),
)


def mc_expected_fraction(box, alpha=MC_ALPHA, beta_max=MC_BETA_MAX) -> float:
    """Fraction of boosted samples expected in ``box``: measure of its preimage."""
    measure = region_measure(
        "relativistic",
        Box(*box),
        pullback=lambda y: boost_x(y, -alpha),
        pullback_jacobian=lambda y: boost_x_jacobian_det(y, -alpha),
    )
    return measure / ball_volume(beta_max)


def check_mc_invariance(seed: int, tol: float):
    batch = sample_invariant_ball(MC_BETA_MAX, MC_SAMPLES, seed)
    pts = batch.points
    n = len(pts)
    total = ball_volume(MC_BETA_MAX)
    beta = speed(pts)
    z = []
    for b0 in np.arange(0.1, MC_BETA_MAX, 0.1):
        p = ball_volume(b0) / total
        z.append((np.count_nonzero(beta <= b0) - n * p) / np.sqrt(n * p * (1 - p)))

    boosted = boost_x(pts, MC_ALPHA)
    inside = np.count_nonzero(beta < 0.5)
    inside_image = np.count_nonzero(speed(boost_x(boosted, -MC_ALPHA)) < 0.5)

    for lo, hi in MC_BOXES:
        if np.max(speed(boost_x(np.array(np.meshgrid(*zip(lo, hi))).reshape(3, -1).T, -MC_ALPHA))) >= MC_BETA_MAX:
            raise DomainError("test box preimage leaves the sampled ball")
        p = mc_expected_fraction((lo, hi))
        k = np.count_nonzero(np.all((boosted >= lo) & (boosted <= hi), axis=-1))
        z.append((k - n * p) / np.sqrt(n * p * (1 - p)))
    z = np.abs(np.array(z))
    return _max(z), inside == inside_image, n, {"bijection_count": inside, "bijection_image_count": inside_image}


def check_volume_divergence(draws: _Draws, trials: int, tol: float):
    grid = np.concatenate([np.linspace(0.0, 0.999, trials), 1.0 - np.logspace(-3.5, -7, 15)])
    vols = np.array([ball_volume(b) for b in grid])
    increasing = bool(np.all(np.diff(vols) > 0))
    edge = ball_volume(1.0 - 1e-7)
    quad_err = _max(
        [rel_error(ball_volume(b), ball_volume_quadrature(b)) for b in (0.05, 0.3, np.tanh(1.0), 0.9, 0.999, 1 - 1e-7)]
    )
    return quad_err, increasing and edge > 1e7, len(grid), {"strictly_increasing": increasing, "volume_at_1_minus_1e-7": edge}


_CHECKS: dict[str, Callable] = {
    "jacobian": check_jacobian,
    "prior_invariance": check_prior_invariance,
    "metric_prior": check_metric_prior,
    "isometry": check_isometry,
    "rapidity_flat": check_rapidity_flat,
    "classical_limit": check_classical_limit,
    "nonfactorization": check_nonfactorization,
    "volume_divergence": check_volume_divergence,
}


def run_check(name: str, config: CheckConfig) -> CheckResult:
    tol = config.tolerance(name)
    start = time.perf_counter()
    try:
        if name == "mc_invariance":
            err, ok, trials, details = check_mc_invariance(config.seed, tol)
        else:
            draws = _Draws(config.seed, name, config.trials)
            err, ok, trials, details = _CHECKS[name](draws, config.trials, tol)
    except (VelspaceError, ArithmeticError, ValueError, integrate.IntegrationWarning) as exc:
        return CheckResult(name, False, config.trials, float("nan"), tol, time.perf_counter() - start, error=f"{type(exc).__name__}: {exc}")
    passed = bool(ok) and bool(err <= tol)
    return CheckResult(name, passed, int(trials), err, tol, time.perf_counter() - start, details)


def run_checks(config: CheckConfig) -> VerificationReport:
    """Run every check named in ``config.suite``, in canonical order."""
    return VerificationReport(config, [run_check(name, config) for name in config.suite])
