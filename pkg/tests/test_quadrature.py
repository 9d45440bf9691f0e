"""Quadrature against closed-form integrals, plus error-bound honesty."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardyriesz import quadrature as q
from hardyriesz.errors import DivergenceError, UsageError

CFG = q.QuadratureConfig()


def test_time_weight_trivial():
    r = q.integrate_time(lambda t: np.ones_like(t), 0.0, 1.0, CFG)
    assert r.value == pytest.approx(2.0, rel=1e-12)
    assert r.error >= abs(r.value - 2.0)


def test_time_inverse_square_oracle():
    # f(t) dt/sqrt(t) = t^-2 e^{-2/t} dt, total 1/2 by u = 1/t
    r = q.integrate_time(lambda t: t ** -1.5 * np.exp(-2.0 / t), 0.0, np.inf, CFG)
    assert r.value == pytest.approx(0.5, rel=1e-8)
    assert r.error >= abs(r.value - 0.5)


def test_time_truncated_heat_derivative():
    # pi^{-1/2} int_0^1 d_x g_t(x-y) dt/sqrt(t) at y - x = 1 equals e^{-1/4}/pi
    def f(t):
        return (1.0 / (2.0 * t)) * (4 * np.pi * t) ** -0.5 \
            * np.exp(-1.0 / (4 * t)) / math.sqrt(math.pi)

    r = q.integrate_time(f, 0.0, 1.0, CFG)
    assert r.value == pytest.approx(math.exp(-0.25) / math.pi, rel=1e-10)


def test_time_with_tail_certificate():
    tail = q.power_tail(1.0, 1.5)  # integrand below t^-2, weight included
    r = q.integrate_time(lambda t: 1.0 / (1.0 + t) ** 1.5, 0.0, np.inf, CFG,
                         tail=tail)
    # int_0^inf dt / (sqrt(t) (1+t)^{3/2}) = 2
    assert r.value == pytest.approx(2.0, rel=1e-8)


def test_space_gaussian_mass():
    tail = q.gauss_poly_tail(1.0, 0.0, 1.0)
    r = q.integrate_space(lambda x: np.exp(-x * x), -np.inf, np.inf, CFG,
                          tail=tail)
    assert r.value == pytest.approx(math.sqrt(math.pi), rel=1e-10)
    assert r.error >= abs(r.value - math.sqrt(math.pi))


def test_space_unbounded_requires_certificate():
    with pytest.raises(UsageError):
        q.integrate_space(lambda x: np.exp(-x * x), 0.0, np.inf, CFG)


def test_space_endpoint_singularity():
    r = q.integrate_space(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, CFG)
    assert r.value == pytest.approx(2.0, rel=1e-7)


def test_pv_odd_cases():
    k = lambda y: 1.0 / (np.pi * y)
    r = q.principal_value(k, lambda y: np.exp(-y * y), 0.0, CFG, outer=8.0,
                          tail=q.gauss_poly_tail(1.0, 0.0, 1.0))
    assert abs(r.value) < 1e-10
    k2 = lambda y: 1.0 / (np.pi * y)
    r2 = q.principal_value(k2, lambda y: (np.abs(y) <= 1.0).astype(float),
                           0.0, CFG, outer=4.0, breakpoints=(-1.0, 1.0))
    assert abs(r2.value) < 1e-10


def test_pv_poisson_profile():
    # kernel 1/(pi (y-x)) applied to 1/(1+y^2) gives -x/(1+x^2)
    k = lambda y: 1.0 / (np.pi * (y - 1.0))
    f = lambda y: 1.0 / (1.0 + y * y)
    r = q.principal_value(k, f, 1.0, CFG, outer=16.0, tail=q.power_tail(1.0, 2.0))
    assert r.value == pytest.approx(-0.5, abs=1e-9)
    assert r.error >= abs(r.value + 0.5)


def test_pv_divergence_detected():
    # f with a jump exactly at the evaluation point is too rough
    k = lambda y: 1.0 / (np.pi * (y - 0.0))
    f = lambda y: (y > 0).astype(float)
    with pytest.raises((DivergenceError, q.AccuracyError)):
        q.principal_value(k, f, 0.0, CFG, outer=4.0,
                          tail=q.power_tail(1.0, 2.0))


@settings(max_examples=20, deadline=None)
@given(a=st.floats(-2, 2), b=st.floats(-2, 2))
def test_pv_linearity(a, b):
    cfg = q.QuadratureConfig(rel_tol=1e-12, max_subdiv=200)
    k = lambda y: 1.0 / (np.pi * (y - 0.5))
    f = lambda y: np.exp(-y * y)
    g = lambda y: 1.0 / (1.0 + y * y)
    tail = q.sum_tails(q.gauss_poly_tail(abs(a), 0.0, 1.0),
                       q.power_tail(abs(b) + 1e-9, 2.0))
    lhs = q.principal_value(lambda y: k(y),
                            lambda y: a * f(y) + b * g(y), 0.5, cfg,
                            outer=16.0, tail=tail).value
    va = q.principal_value(k, f, 0.5, cfg, outer=16.0,
                           tail=q.gauss_poly_tail(1.0, 0.0, 1.0)).value
    vb = q.principal_value(k, g, 0.5, cfg, outer=16.0,
                           tail=q.power_tail(1.0, 2.0)).value
    assert lhs == pytest.approx(a * va + b * vb, abs=1e-10 * (1 + abs(a) + abs(b)))


def test_halving_tolerance_does_not_hurt():
    truth = 0.5
    f = lambda t: t ** -1.5 * np.exp(-2.0 / t)
    errs = []
    for rel in (1e-6, 1e-8, 1e-10):
        cfg = q.QuadratureConfig(rel_tol=rel)
        errs.append(abs(q.integrate_time(f, 0.0, np.inf, cfg).value - truth))
    assert errs[2] <= errs[0] + 1e-15


def test_tail_constructors_bound_their_integrals():
    t = q.gauss_poly_tail(2.0, 1.0, 3.0)
    xs = np.linspace(1.0, 30.0, 4000)
    f = 2.0 * xs * np.exp(-xs * xs / 3.0)
    true = np.trapezoid(f, xs)
    assert t(1.0) >= true
    p = q.power_tail(1.0, 2.5)
    f = xs ** -2.5
    assert p(1.0) >= np.trapezoid(f, xs)
