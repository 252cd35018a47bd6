import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import integrate

from velspace import (
    Ball,
    Box,
    CartesianVelocity,
    DensityValue,
    DivergenceError,
    DomainError,
    EnergyPoint,
    NumericError,
    PolarVelocity,
    SingularPointError,
    polar_boost_jacobian,
    polar_lorentz_boost,
    polar_to_cartesian,
    prior_classical,
    prior_relativistic_1d,
    prior_relativistic_cartesian,
    prior_relativistic_polar,
    region_measure,
    reparametrize_density,
)
from velspace.kinematics import boost_x, boost_x_jacobian_det, polar_boost
from velspace.measures import (
    density_polar,
    energy_to_beta,
    fd_jacobian,
    polar_boost_jacobian_array,
    polar_boost_partials,
    prior_relativistic_energy,
    prior_relativistic_rapidity,
)


@pytest.mark.parametrize("xyz, a, expected", [((0, 0, 0), 1, 1), ((100, -3, 7), 1, 1), ((0, 0, 0), 2.5, 2.5)])
def test_prior_classical(xyz, a, expected):
    assert float(prior_classical(CartesianVelocity(xyz, mode="classical"), a)) == expected


def test_prior_classical_1d_tag():
    assert prior_classical(CartesianVelocity([4.0], mode="classical")).parametrization == "cartesian1d"


@pytest.mark.parametrize("beta, expected", [(0.0, 1.0), (0.6, 1.5625), (-0.6, 1.5625)])
def test_prior_1d(beta, expected):
    d = prior_relativistic_1d(beta)
    assert d.value == pytest.approx(expected, rel=1e-15)
    assert d.parametrization == "cartesian1d"


def test_prior_1d_domain():
    with pytest.raises(DomainError):
        prior_relativistic_1d(1.0)


@pytest.mark.parametrize("beta, a, expected", [(0.5, 1, 0.4444444444444444), (0.0, 1, 0.0), (0.5, 3, 1.3333333333333333)])
def test_prior_polar(beta, a, expected):
    d = prior_relativistic_polar(PolarVelocity(beta, 0.3, 1.0), a)
    assert d.value == pytest.approx(expected, rel=1e-15)
    assert d.parametrization == "polar"


@pytest.mark.parametrize("xyz, expected", [((0, 0, 0), 1.0), ((0.6, 0, 0), 2.44140625), ((0.5, 0.5, 0), 4.0)])
def test_prior_cartesian(xyz, expected):
    assert prior_relativistic_cartesian(CartesianVelocity(xyz)).value == expected


def test_prior_scale_validation():
    with pytest.raises(DomainError):
        prior_relativistic_1d(0.1, scale=0.0)
    with pytest.raises(DomainError):
        prior_classical(CartesianVelocity((0, 0, 0), mode="classical"), -1.0)


def test_density_value_nonnegative():
    with pytest.raises(NumericError):
        DensityValue(-1.0, "polar")


def test_energy_prior():
    d = prior_relativistic_energy(EnergyPoint(2.0, 1.0))
    assert d.value == pytest.approx(1 / math.sqrt(3), rel=1e-15)
    assert EnergyPoint(2.0).beta == pytest.approx(math.sqrt(0.75), rel=1e-15)
    with pytest.raises(DomainError):
        EnergyPoint(0.5, 1.0)
    with pytest.raises(DivergenceError):
        prior_relativistic_energy(EnergyPoint(1.0, 1.0))


def test_rapidity_prior_flat():
    assert prior_relativistic_rapidity(-3.0, 2.0).value == 2.0


def test_reparametrize_identity():
    d = reparametrize_density(lambda x: prior_relativistic_1d(float(x[0])), lambda y: y, [0.3])
    assert d.value == pytest.approx(prior_relativistic_1d(0.3).value, rel=1e-9)


def test_reparametrize_to_rapidity_is_constant():
    vals = [
        reparametrize_density(lambda x: prior_relativistic_1d(float(x[0])), np.tanh, [b], parametrization="rapidity").value
        for b in np.linspace(-5, 5, 41)
    ]
    # finite differences of tanh lose digits where sech^2 is small
    assert np.allclose(vals, 1.0, rtol=1e-6, atol=0)
    exact = [
        reparametrize_density(
            lambda x: prior_relativistic_1d(float(x[0])), np.tanh, [b], jacobian=lambda y: 1 / np.cosh(y[0]) ** 2
        ).value
        for b in np.linspace(-5, 5, 41)
    ]
    assert np.allclose(exact, 1.0, rtol=1e-10, atol=0)


def test_reparametrize_to_energy():
    d = reparametrize_density(lambda x: prior_relativistic_1d(float(x[0])), energy_to_beta, [2.0], parametrization="energy")
    assert d.value == pytest.approx(0.5773502691896258, rel=1e-9)
    exact = reparametrize_density(
        lambda x: prior_relativistic_1d(float(x[0])),
        energy_to_beta,
        [2.0],
        jacobian=lambda y: 1.0 / (y[0] ** 3 * energy_to_beta(y[0])),
    )
    assert exact.value == pytest.approx(0.5773502691896258, rel=1e-15)


def test_reparametrize_singular():
    with pytest.raises(NumericError):
        reparametrize_density(lambda x: 1.0, lambda y: 0.0 * y, [0.5])


def test_fd_jacobian_polynomial():
    J = fd_jacobian(lambda x: np.array([x[0] ** 2 * x[1], np.sin(x[1])]), [3.0, 0.5])
    assert J == pytest.approx(np.array([[3.0, 9.0], [0.0, math.cos(0.5)]]), rel=1e-9)


def test_polar_jacobian_identity():
    assert polar_boost_jacobian(PolarVelocity(0.7, -0.2, 3.0), 0.0) == pytest.approx(1.0, rel=1e-15)


def test_polar_jacobian_oblique():
    J = polar_boost_jacobian(PolarVelocity(0.6, 0.5, 1.2), 0.3)
    assert J == pytest.approx(1.4652014652014647, rel=1e-14)
    # finite-difference oracle on the (beta, cos_theta) block; phi passes through
    def T(x):
        b, c, _ = polar_boost(x[0], x[1], 1.2, 0.3)
        return np.array([b, c])

    assert J == pytest.approx(abs(np.linalg.det(fd_jacobian(T, [0.6, 0.5]))), rel=1e-8)


def test_polar_jacobian_on_axis():
    # on the axis the radial factor is the collinear derivative (1 - a^2)/(1 - a b)^2
    P = polar_boost_partials(0.8, 1.0, 0.5)
    assert P[0, 0] == pytest.approx(0.75 / 0.6**2, rel=1e-14)
    J = polar_boost_jacobian(PolarVelocity(0.8, 1.0, 0.0), 0.5)
    assert J == pytest.approx(abs(np.linalg.det(P)), rel=1e-14)
    assert J == pytest.approx((0.64 / 0.36**2) / (0.25 / 0.75**2), rel=1e-14)


def test_polar_jacobian_singular():
    with pytest.raises(SingularPointError):
        polar_boost_jacobian(PolarVelocity(0.0), 0.3)
    with pytest.raises(SingularPointError):
        polar_boost_jacobian(PolarVelocity(0.5, 1.0, 0.0), 0.5)


def test_prior_invariance_bulk(rng):
    n = 10_000
    b, c, a = rng.uniform(0, 0.99, n), rng.uniform(-1, 1, n), rng.uniform(-0.99, 0.99, n)
    bp, _, _ = polar_boost(b, c, 0.0, a)
    lhs = density_polar(bp) * polar_boost_jacobian_array(b, c, a)
    assert np.max(np.abs(lhs / density_polar(b) - 1)) <= 1e-10


def test_parametrization_consistency(rng):
    n = 10_000
    b, c, f = rng.uniform(0, 0.99, n), rng.uniform(-1, 1, n), rng.uniform(0, 2 * np.pi, n)
    for i in range(0, n, 997):
        p = PolarVelocity(b[i], c[i], f[i])
        lhs = prior_relativistic_cartesian(polar_to_cartesian(p)).value * p.beta**2
        assert lhs == pytest.approx(prior_relativistic_polar(p).value, rel=1e-12)


def test_classical_limit_bound():
    beta = np.linspace(0, 0.1, 10001)
    for b in beta[::100]:
        mu = prior_relativistic_cartesian(CartesianVelocity((0, b, 0))).value
        assert abs(mu - 1) <= 2.1 * b * b


def test_nonfactorization():
    joint = prior_relativistic_cartesian(CartesianVelocity((0.5, 0.5, 0))).value
    product = prior_relativistic_1d(0.5).value * prior_relativistic_1d(0.5).value * prior_relativistic_1d(0.0).value
    assert joint == 4.0
    assert product == pytest.approx(16 / 9, rel=1e-15)
    assert joint != product
    a1 = 1.7
    c3 = prior_classical(CartesianVelocity((0.5, 0.5, 0), mode="classical"), a1**3).value
    c1 = prior_classical(CartesianVelocity([0.5], mode="classical"), a1).value
    assert c3 == c1**3


def test_region_measure_balls():
    assert region_measure("relativistic", Ball(0.0)) == 0.0
    assert region_measure("relativistic", Ball(math.tanh(1))) == pytest.approx(math.pi * (math.sinh(2) - 2), rel=1e-14)
    assert region_measure("classical", Ball(2.0)) == pytest.approx(33.510321638291124, rel=1e-15)
    with pytest.raises(DivergenceError):
        region_measure("relativistic", Ball(1.0))


def test_region_measure_box_matches_nested_quadrature():
    lo, hi = (-0.3, 0.0, -0.2), (0.3, 0.4, 0.1)
    got = region_measure("relativistic", Box(lo, hi), scale=2.0)
    ref, _ = integrate.tplquad(
        lambda z, y, x: 1 / (1 - x * x - y * y - z * z) ** 2, lo[0], hi[0], lo[1], hi[1], lo[2], hi[2], epsabs=0, epsrel=1e-12
    )
    assert got == pytest.approx(8 * ref, rel=1e-10)


def test_region_measure_empty_and_classical_box():
    assert region_measure("relativistic", Box((0, 0, 0), (0, 0.5, 0.5))) == 0.0
    assert region_measure("classical", Box((0, 0, 0), (1, 2, 3)), scale=2.0) == pytest.approx(48.0, rel=1e-12)


def test_region_measure_box_errors():
    with pytest.raises(DivergenceError):
        region_measure("relativistic", Box((0, 0, 0), (0.8, 0.8, 0.1)))
    with pytest.raises(DomainError):
        region_measure("relativistic", Box((0.2, 0, 0), (0.1, 0.1, 0.1)))
    with pytest.raises(DomainError):
        region_measure("quantum", Ball(0.1))


def test_region_measure_boost_invariance():
    box = Box((-0.3, -0.3, -0.3), (0.3, 0.3, 0.3))
    direct = region_measure("relativistic", box)
    analytic = region_measure(
        "relativistic", box, pullback=lambda y: boost_x(y, 0.4), pullback_jacobian=lambda y: boost_x_jacobian_det(y, 0.4)
    )
    numeric = region_measure("relativistic", box, pullback=lambda y: boost_x(y, 0.4))
    assert analytic == pytest.approx(direct, rel=1e-10)
    assert numeric == pytest.approx(direct, rel=1e-8)


@given(st.floats(0.001, 0.99), st.floats(-1, 1), st.floats(-0.99, 0.99))
def test_jacobian_identity_property(b, c, a):
    bp, _, _ = polar_boost(b, c, 0.0, a)
    assume(bp > 1e-6)
    J = polar_boost_jacobian_array(b, c, a)
    lhs = bp**2 / ((1 - bp) * (1 + bp)) ** 2 * J
    assert lhs == pytest.approx(b**2 / ((1 - b) * (1 + b)) ** 2, rel=1e-10)
    assert J == pytest.approx(abs(np.linalg.det(polar_boost_partials(b, c, a))), rel=1e-8)


@given(st.floats(0.01, 0.95), st.floats(-0.99, 0.99), st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_jacobian_chain_rule(b, c, a1, a2):
    # successive boosts compose, so Jacobians multiply
    from velspace import compose_boosts

    p = PolarVelocity(b, c, 0.0)
    q = polar_lorentz_boost(p, a1)
    assume(q.beta > 1e-4 and polar_lorentz_boost(q, a2).beta > 1e-4)
    J = polar_boost_jacobian(p, a1) * polar_boost_jacobian(q, a2)
    assert J == pytest.approx(polar_boost_jacobian(p, compose_boosts(a1, a2)), rel=1e-8)
