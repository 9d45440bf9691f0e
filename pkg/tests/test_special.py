"""Closed-form oracles for the modified Bessel wrappers.

Half-integer orders have hyperbolic closed forms; everything else is checked
through recurrences and scaling identities.
"""

import math

import numpy as np
import pytest

from hardyriesz import special as sp
from hardyriesz.errors import DomainError, OverflowSignal


def i_half(z):
    return math.sqrt(2.0 / (math.pi * z)) * math.sinh(z)


def i_minus_half(z):
    return math.sqrt(2.0 / (math.pi * z)) * math.cosh(z)


def test_bessel_i_half_integer_closed_forms():
    assert sp.bessel_i(0.5, 1.0) == pytest.approx(0.9376748882454876, rel=1e-12)
    assert sp.bessel_i(-0.5, 1.0) == pytest.approx(1.2312002145929675, rel=1e-12)
    for z in np.linspace(0.1, 50, 97):
        assert sp.bessel_i(0.5, z) == pytest.approx(i_half(z), rel=1e-10)
        assert sp.bessel_i(-0.5, z) == pytest.approx(i_minus_half(z), rel=1e-10)


def test_bessel_i_at_zero_and_large():
    assert sp.bessel_i(0.5, 0.0) == 0.0
    # scaled route keeps 1e-10 relative accuracy at z = 700
    z = 700.0
    expect = i_half(z)
    assert sp.bessel_i(0.5, z) == pytest.approx(expect, rel=1e-10)


def test_bessel_i_overflow_is_signalled():
    with pytest.raises(OverflowSignal):
        sp.bessel_i(0.5, 800.0)


def test_bessel_domain_errors():
    with pytest.raises(DomainError):
        sp.bessel_i(0.5, -1.0)
    with pytest.raises(DomainError):
        sp.bessel_i(-0.75, 1.0)
    with pytest.raises(DomainError):
        sp.scaled_bessel_u(0.5, 0.0)


def test_scaled_u_closed_forms():
    assert sp.scaled_bessel_u(0.5, 1.0) == pytest.approx(1.0 - math.exp(-2.0),
                                                         rel=1e-12)
    assert sp.scaled_bessel_u(-0.5, 1.0) == pytest.approx(1.0 + math.exp(-2.0),
                                                          rel=1e-12)
    # tends to 1 like 1 + O(1/z), without overflow
    assert sp.scaled_bessel_u(0.5, 1e6) == pytest.approx(1.0, abs=1e-5)
    assert sp.scaled_bessel_u(1.5, 1e8) == pytest.approx(1.0, abs=1e-6)


def test_scaled_u_consistent_with_bessel_i():
    for tau in (-0.5, 0.0, 0.5, 1.5, 2.5):
        for z in np.linspace(0.2, 50, 41):
            lhs = sp.scaled_bessel_u(tau, z) * math.exp(z) \
                / math.sqrt(2 * math.pi * z)
            assert lhs == pytest.approx(sp.bessel_i(tau, z), rel=1e-10)


def test_derivative_recurrence():
    # d/dz [z^-tau I_tau(z)] = z^-tau I_{tau+1}(z)
    h = 1e-5
    for tau in (0.0, 0.5, 1.0, 1.5):
        for z in np.linspace(0.5, 20, 23):
            f = lambda s: s ** -tau * sp.bessel_i(tau, s)
            lhs = (f(z + h) - f(z - h)) / (2 * h)
            rhs = z ** -tau * sp.bessel_i(tau + 1.0, z)
            assert lhs == pytest.approx(rhs, rel=1e-6)


def test_theta_values_and_monotonicity():
    assert sp.theta(0.5, 1.0, 1.0) == pytest.approx(0.6299485325744386, rel=1e-12)
    assert sp.theta(1e-8, 2.0, 3.0) == pytest.approx(1.0, abs=1e-6)
    assert sp.theta(1.0, 0.0, 0.0) == 1.0
    rng = np.random.default_rng(7)
    t = 10 ** rng.uniform(-3, 1, 200)
    x = 10 ** rng.uniform(-2, 1, 200)
    y = 10 ** rng.uniform(-2, 1, 200)
    v = sp.theta(t, x, y)
    assert np.all(v > 0) and np.all(v <= 1.0)
    # decreasing in x^2 + y^2 at fixed t
    assert np.all(sp.theta(t, 1.1 * x, y) <= v + 1e-15)


def test_sup_constants_are_bounds():
    z = np.geomspace(1e-6, 1e5, 2000)
    for tau in (0.0, 0.5, 1.5):
        u = sp.bessel_i_scaled(tau, z) * np.sqrt(2 * np.pi * z)
        assert np.max(u) <= sp.sup_scaled_u(tau)
        assert np.max(u / np.minimum(1.0, z) ** (tau + 0.5)) \
            <= sp.sup_scaled_u_over_power(tau)
