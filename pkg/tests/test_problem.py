import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from fracbs.problem import (
    ConstantCoeffSpec,
    HomogenizedSpec,
    PowerSeries,
    caputo_of_power,
    example1,
    example2,
    example2_black_scholes,
    homogenize,
    to_constant_coeff,
    zero_problem,
)


def caputo_quad(f_prime, alpha, t):
    """Caputo derivative by quadrature with the algebraic end-point weight."""
    val, _ = integrate.quad(f_prime, 0.0, t, weight="alg", wvar=(0.0, -alpha))
    return val / special.gamma(1.0 - alpha)


@settings(max_examples=20, deadline=None)
@given(mu=st.floats(1.0, 4.0), alpha=st.floats(0.1, 0.9), t=st.floats(0.05, 2.0))
def test_caputo_of_power_matches_quadrature(mu, alpha, t):
    got = caputo_of_power(mu, alpha)(t)
    ref = caputo_quad(lambda s: mu * s ** (mu - 1.0), alpha, t)
    assert got == pytest.approx(ref, rel=1e-8)


def test_caputo_of_constant_is_zero():
    assert np.all(caputo_of_power(0, 0.5)(np.array([0.1, 1.0])) == 0.0)
    with pytest.raises(ValueError):
        caputo_of_power(-1.0, 0.5)


def test_power_series():
    p = PowerSeries(((1.0, 2), (2.0, 1), (1.0, 0)))
    assert p(2.0) == pytest.approx(9.0)
    d = p.caputo(0.5)(1.0)
    assert d == pytest.approx(2 / special.gamma(2.5) + 2 / special.gamma(1.5))
    assert not p.is_constant() and PowerSeries(((3.0, 0),)).is_constant()


def residual(prob, x, t, dx=1e-4):
    """D_t^alpha u - a u_xx - b u_x + c u - f with analytic time derivative of example 1."""
    u = prob.exact
    alpha = prob.alpha
    shape = x**3 * (1 - x) ** 3
    dt_alpha = shape * (special.gamma(alpha + 1) + t ** (1 - alpha) / special.gamma(2 - alpha))
    uxx = (u(x + dx, t) - 2 * u(x, t) + u(x - dx, t)) / dx**2
    ux = (u(x + dx, t) - u(x - dx, t)) / (2 * dx)
    return dt_alpha - prob.a * uxx - prob.b * ux + prob.c * u(x, t) - prob.source(x, t)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9])
def test_example1_source_consistent(alpha):
    prob = example1(alpha)
    x = np.linspace(0.05, 0.95, 19)
    for t in (0.01, 0.5, 1.0):
        assert np.max(np.abs(residual(prob, x, t))) < 1e-6
    assert np.allclose(prob.phi(x), prob.exact(x, 0.0))


def test_transformation_coefficients():
    cc = to_constant_coeff(example2_black_scholes(0.7))
    assert (cc.a, cc.b, cc.c) == (0.5, 0.5, 1.0)
    assert (cc.x_l, cc.x_r) == (0.0, pytest.approx(1.0))
    # time reversal: w(x, 0) is the payoff, boundaries at t are rebates at T - t
    assert cc.initial(np.array(0.5)) == pytest.approx(0.125 + 0.25 + 1)
    assert cc.p(0.25) == pytest.approx(1.25**2) and cc.q(0.25) == pytest.approx(3 * 1.25**2)


@pytest.mark.parametrize("alpha", [0.7, 0.9])
def test_example2_closed_form_equals_derived(alpha):
    closed = example2(alpha)
    derived = example2(alpha, closed_form=False)
    x = np.linspace(0, 1, 11)
    for t in (0.001, 0.3, 1.0):
        assert np.allclose(closed.source(x, t), derived.source(x, t), rtol=1e-13, atol=1e-13)
    assert np.allclose(closed.phi(x), x**3 + x**2 - 2 * x)
    assert np.allclose(derived.phi(x), closed.phi(x))


def test_example2_lift_and_reconstruction():
    prob = example2(0.7)
    assert prob.lift(0.0, 0.5) == pytest.approx(1.5**2)
    assert prob.lift(1.0, 0.5) == pytest.approx(3 * 1.5**2)
    assert prob.reconstruct(0.5, 0.0, prob.phi(0.5)) == pytest.approx(0.125 + 0.25 + 1)


def test_homogenize_needs_derivatives():
    spec = ConstantCoeffSpec(0.5, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, lambda x: 0 * x + 2.0,
                             lambda t: 0 * t + 2.0, lambda t: 0 * t + 2.0)
    with pytest.raises(ValueError):
        homogenize(spec)
    hom = homogenize(spec, constant_boundaries=True)
    assert np.allclose(hom.source(np.linspace(0, 1, 5), 0.3), 0.0)
    assert np.allclose(hom.phi(np.linspace(0, 1, 5)), 0.0)


def test_initial_data_must_vanish():
    with pytest.raises(ValueError):
        HomogenizedSpec(0.5, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, lambda x: 1.0 + 0 * x, lambda x, t: 0 * x)
    with pytest.raises(ValueError):
        example1(0.5, a=-1.0)


def test_zero_problem():
    prob = zero_problem(0.5, phi=lambda x: np.sin(math.pi * x))
    assert prob.source(np.array([0.3]), 0.2)[0] == 0.0
    assert prob.exact is None
