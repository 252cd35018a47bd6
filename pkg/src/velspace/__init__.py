"""Least-informative priors, invariant geometry and sampling on velocity space.

Classical velocity space carries the Euclidean metric and a flat prior.
Relativistic velocity space (the open unit ball, in units of c) carries the
metric under which every Lorentz boost is an isometry, and the prior
``a / (1 - |beta|^2)^2`` in Cartesian coordinates.
"""

__version__ = "0.1.0"

from .core import (
    CartesianVelocity,
    PolarVelocity,
    Rapidity,
    beta_to_rapidity,
    cartesian_to_polar,
    polar_to_cartesian,
    rapidity_to_beta,
)
from .errors import DivergenceError, DomainError, NumericError, SingularPointError, VelspaceError
from .geometry import (
    MetricTensor,
    ball_volume,
    classical_distance,
    geodesic_distance,
    metric_classical_polar,
    metric_relativistic_cartesian,
    metric_relativistic_polar,
    volume_element,
)
from .kinematics import (
    Boost,
    compose_boosts,
    galilean_boost_1d,
    galilean_boost_3d,
    inverse_boost,
    lorentz_boost_1d,
    lorentz_boost_3d,
    polar_lorentz_boost,
)
from .measures import (
    Ball,
    Box,
    DensityValue,
    EnergyPoint,
    polar_boost_jacobian,
    prior_classical,
    prior_relativistic_1d,
    prior_relativistic_cartesian,
    prior_relativistic_polar,
    region_measure,
    reparametrize_density,
)
from .sampler import SampleBatch, sample_classical_ball, sample_invariant_ball
from .verify import CheckConfig, VerificationReport, run_checks
