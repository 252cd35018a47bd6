import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from velspace import (
    CartesianVelocity,
    DomainError,
    PolarVelocity,
    Rapidity,
    beta_to_rapidity,
    cartesian_to_polar,
    polar_to_cartesian,
    rapidity_to_beta,
)
from velspace.core import from_polar, is_precision_degraded, to_polar


@pytest.mark.parametrize(
    "xyz, expected",
    [
        ((0.6, 0, 0), (0.6, 1.0, 0.0)),
        ((0, 0.3, 0), (0.3, 0.0, math.pi / 2)),
        ((0, 0, 0), (0.0, 1.0, 0.0)),
        ((-0.4, 0, 0), (0.4, -1.0, 0.0)),
    ],
)
def test_cartesian_to_polar_examples(xyz, expected):
    p = cartesian_to_polar(CartesianVelocity(xyz))
    assert (p.beta, p.cos_theta, p.phi) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "polar, expected",
    [
        ((0.5, 1.0, 0.0), (0.5, 0, 0)),
        ((0.3, 0.0, math.pi / 2), (0, 0.3, 0)),
        ((0.0, -0.2, 1.0), (0, 0, 0)),
    ],
)
def test_polar_to_cartesian_examples(polar, expected):
    v = polar_to_cartesian(PolarVelocity(*polar))
    assert v.components == pytest.approx(expected, abs=1e-16)


def test_axis_convention():
    # polar axis along x, by carries sin(phi) and bz carries cos(phi)
    b, c, phi = 0.5, 0.6, 0.3
    x, y, z = from_polar(b, c, phi)
    assert x == pytest.approx(b * c)
    assert y == pytest.approx(b * 0.8 * math.sin(phi))
    assert z == pytest.approx(b * 0.8 * math.cos(phi))


@pytest.mark.parametrize("beta, expected", [(0.0, 0.0), (0.6, 0.6931471805599453), (0.8, 1.0986122886681098)])
def test_beta_to_rapidity_examples(beta, expected):
    assert beta_to_rapidity(beta) == pytest.approx(expected, rel=1e-15, abs=0)
    assert beta_to_rapidity(-beta) == -beta_to_rapidity(beta)


@pytest.mark.parametrize("b, expected", [(0.0, 0.0), (math.log(2), 0.6), (1.0, 0.7615941559557649)])
def test_rapidity_to_beta_examples(b, expected):
    assert rapidity_to_beta(b) == pytest.approx(expected, rel=1e-15, abs=0)


def test_rapidity_near_light_cone():
    beta = 1 - 1e-12
    eps = 1 - beta  # exact
    assert beta_to_rapidity(beta) == pytest.approx(0.5 * math.log(2 / eps - 1), rel=1e-14)


@pytest.mark.parametrize("beta", [1.0, -1.0, 1.5, math.nan, math.inf])
def test_rapidity_domain(beta):
    with pytest.raises(DomainError):
        beta_to_rapidity(beta)


def test_rapidity_to_beta_rejects_nonfinite():
    with pytest.raises(DomainError):
        rapidity_to_beta(math.inf)


def test_superluminal_message_names_components():
    with pytest.raises(DomainError, match=r"superluminal.*bx=1\.2"):
        CartesianVelocity((1.2, 0, 0))
    with pytest.raises(DomainError, match="lightlike"):
        CartesianVelocity((0.6, 0.8, 0.0))


def test_nonfinite_component_named():
    with pytest.raises(DomainError, match="by is not finite"):
        CartesianVelocity((0.1, math.nan, 0))
    with pytest.raises(DomainError, match="vz"):
        CartesianVelocity((1.0, 2.0, math.inf), mode="classical")


def test_classical_unbounded():
    v = CartesianVelocity((100, -3, 7), mode="classical")
    assert v.speed == pytest.approx(math.sqrt(10058))


def test_component_padding():
    v = CartesianVelocity([0.3])
    assert v.components == (0.3, 0.0, 0.0) and v.ndim == 1
    with pytest.raises(DomainError):
        CartesianVelocity([])
    with pytest.raises(DomainError):
        CartesianVelocity([0.1, 0.1, 0.1, 0.1])


@pytest.mark.parametrize(
    "kwargs",
    [dict(beta=-0.1), dict(beta=1.0), dict(beta=0.5, cos_theta=1.2), dict(beta=0.5, phi=2 * math.pi), dict(beta=0.5, phi=-0.1)],
)
def test_polar_velocity_ranges(kwargs):
    with pytest.raises(DomainError):
        PolarVelocity(**kwargs)


def test_precision_flag():
    assert CartesianVelocity((1 - 1e-13, 0, 0)).precision_degraded
    assert not CartesianVelocity((0.999, 0, 0)).precision_degraded
    assert is_precision_degraded([0.1, 1 - 5e-13])


def test_rapidity_type_round_trip():
    v = CartesianVelocity((0.1, -0.4, 0.2))
    r = Rapidity.from_velocity(v)
    assert r.value == pytest.approx(math.atanh(v.speed))
    assert r.to_velocity().components == pytest.approx(v.components, abs=1e-15)
    assert Rapidity.from_velocity(CartesianVelocity((0, 0, 0))).value == 0.0
    with pytest.raises(DomainError):
        Rapidity(1.0, (1.0, 1.0, 0.0))


def test_round_trip_bulk(rng):
    # 1e4 random interior velocities, per-component agreement 1e-13
    n = 10_000
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    xyz = rng.uniform(0, 0.999, n)[:, None] * d
    back = from_polar(*to_polar(xyz))
    assert np.max(np.abs(back - xyz)) <= 1e-13


def test_rapidity_round_trip_grid():
    beta = np.concatenate([np.linspace(-1 + 1e-12, 1 - 1e-12, 20001), [1 - 1e-12, -(1 - 1e-12)]])
    back = rapidity_to_beta(beta_to_rapidity(beta))
    assert np.max(np.abs(back - beta)) <= 1e-14


def test_rapidity_monotone():
    b = beta_to_rapidity(np.linspace(-0.999999, 0.999999, 100001))
    assert np.all(np.diff(b) > 0)


unit = st.floats(-1, 1, allow_nan=False)
speeds = st.floats(0, 0.999999, allow_nan=False)


@given(speeds, st.floats(-1, 1), st.floats(0, 2 * math.pi, exclude_max=True))
def test_polar_round_trip_property(beta, c, phi):
    # cos(theta) cannot resolve angles below ~1e-8 next to the polar axis
    assume(1 - abs(c) > 1e-6)
    p = PolarVelocity(beta, c, phi)
    v = polar_to_cartesian(p)
    q = cartesian_to_polar(v)
    assert q.beta == pytest.approx(beta, rel=1e-14, abs=1e-300)
    assert np.max(np.abs(np.subtract(polar_to_cartesian(q).components, v.components))) <= 1e-13


@given(st.floats(-0.999999999, 0.999999999))
def test_rapidity_inverse_property(beta):
    assert rapidity_to_beta(beta_to_rapidity(beta)) == pytest.approx(beta, abs=1e-15)


@given(st.floats(-30, 30))
def test_rapidity_odd_property(b):
    assert rapidity_to_beta(-b) == -rapidity_to_beta(b)
