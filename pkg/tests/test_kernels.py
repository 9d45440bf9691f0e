"""Kernel families against closed forms, symmetry, positivity, the semigroup
law by quadrature, and the finite-difference derivative oracle."""

import math

import numpy as np
import pytest

from hardyriesz import kernels as K
from hardyriesz import quadrature as q
from hardyriesz.errors import CapabilityError, DomainError

CFG = q.QuadratureConfig()

HEAT = K.heat_family(1)
DIR = K.dirichlet_family()
BES1 = K.bessel_family(1.0)
LAG1 = K.laguerre_family(1.0)
ALL = [HEAT, DIR, BES1, LAG1, K.bessel_family(0.5), K.laguerre_family(0.5)]


def test_heat_at_diagonal():
    assert K.kernel_eval(HEAT, 1.0, 0.3, 0.3).value == pytest.approx(
        (4 * math.pi) ** -0.5, rel=1e-14)


def test_bessel_beta1_closed_form():
    expect = (1 - math.exp(-4.0)) / math.sqrt(math.pi)
    assert K.kernel_eval(BES1, 0.25, 1.0, 1.0).value == pytest.approx(
        expect, rel=1e-12)
    assert K.kernel_eval(DIR, 0.25, 1.0, 1.0).value == pytest.approx(
        expect, rel=1e-12)


def test_dirichlet_boundary_vanishing():
    vals = [K.kernel_eval(DIR, 0.25, 1.0, y).value for y in (1e-3, 1e-5, 1e-7)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-6


def test_log_value_consistent():
    for fam in ALL:
        v = K.kernel_eval(fam, 0.7, 1.3, 0.4)
        assert v.log_value == pytest.approx(math.log(v.value), rel=1e-10)


def test_symmetry_and_positivity():
    rng = np.random.default_rng(5)
    t = 10 ** rng.uniform(-3, 1, 400)
    x = 10 ** rng.uniform(-2, 1, 400)
    y = 10 ** rng.uniform(-2, 1, 400)
    for fam in ALL:
        a = fam.ev(t, x, y)
        b = fam.ev(t, y, x)
        assert np.all(a >= 0)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-300)


def test_bessel1_equals_dirichlet_everywhere():
    rng = np.random.default_rng(1)
    t = 10 ** rng.uniform(-3, 1, 1000)
    x = 10 ** rng.uniform(-2, 1, 1000)
    y = 10 ** rng.uniform(-2, 1, 1000)
    a = BES1.ev(t, x, y)
    b = DIR.ev(t, x, y)
    m = b > 0
    assert np.max(np.abs(a[m] - b[m]) / b[m]) < 1e-12


def test_laguerre_small_time_limit_is_bessel():
    rng = np.random.default_rng(2)
    x = 10 ** rng.uniform(-1, math.log10(2.0), 300)
    y = 10 ** rng.uniform(-1, math.log10(2.0), 300)
    a = LAG1.ev(1e-4, x, y)
    b = BES1.ev(1e-4, x, y)
    m = b > 1e-280
    assert np.max(np.abs(a[m] - b[m]) / b[m]) < 1e-3


def test_semigroup_law_by_quadrature():
    for fam in (HEAT, DIR, BES1, LAG1):
        for (t, s) in ((0.1, 0.1), (0.05, 0.2)):
            x0, y0 = 1.0, 1.3
            f = lambda z: fam.ev(t, x0, z) * fam.ev(s, z, y0)
            tail = q.gauss_poly_tail(
                2.0 * (4 * math.pi * min(t, s)) ** -0.5, 0.0,
                4.0 * max(t, s), center=x0)
            lo = fam.domain.intervals[0][0]
            r = q.integrate_space(f, lo if lo == 0 else -np.inf, np.inf, CFG,
                                  tail=tail, breakpoints=[x0, y0])
            direct = float(fam.ev(t + s, x0, y0))
            assert r.value == pytest.approx(direct, rel=1e-6)


def test_semigroup_bessel_value_frozen():
    # T_{0.2}(1,1) for beta=1 equals the reflection kernel closed form
    expect = (4 * math.pi * 0.2) ** -0.5 * (1 - math.exp(-5.0))
    assert float(BES1.ev(0.2, 1.0, 1.0)) == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(0.6265329472037798, rel=1e-12)


def test_dirichlet_mass_is_erf():
    from scipy.special import erf
    x0, t0 = 1.0, 0.25
    tail = DIR.space_tail_value(x0, t0)
    r = q.integrate_space(lambda y: DIR.ev(t0, x0, y), 0.0, np.inf, CFG,
                          tail=tail, breakpoints=[x0])
    assert r.value == pytest.approx(float(erf(x0 / (2 * math.sqrt(t0)))),
                                    abs=1e-8)
    assert r.value == pytest.approx(0.8427007929497149, abs=1e-8)


def test_gaussian_domination_heat_dirichlet():
    rng = np.random.default_rng(9)
    t = 10 ** rng.uniform(-3, 1, 500)
    x = 10 ** rng.uniform(-2, 1, 500)
    y = 10 ** rng.uniform(-2, 1, 500)
    env = (4 * np.pi * t) ** -0.5 * np.exp(-(x - y) ** 2 / (4 * t))
    assert np.all(HEAT.ev(t, x, y) <= env * (1 + 1e-12))
    assert np.all(DIR.ev(t, x, y) <= env * (1 + 1e-12))


def test_kernel_dx_matches_finite_differences():
    rng = np.random.default_rng(4)
    for fam in ALL:
        t = 10 ** rng.uniform(-2, 0.5, 1000)
        x = 10 ** rng.uniform(-1, 0.8, 1000)
        y = 10 ** rng.uniform(-1, 0.8, 1000)
        h = 1e-5 * np.minimum(x, 1.0)
        an = fam.dx(t, x, y)
        fd = (fam.ev(t, x + h, y) - fam.ev(t, x - h, y)) / (2 * h)
        scale = np.maximum(np.abs(an), np.abs(fd)) + 1e-12 * np.max(np.abs(an))
        assert np.max(np.abs(an - fd) / scale) < 1e-6


def test_dirichlet_dx_closed_value():
    expect = 4.0 * math.exp(-4.0) * math.pi ** -0.5
    assert K.kernel_dx(DIR, 0, 0.25, 1.0, 1.0) == pytest.approx(expect,
                                                                rel=1e-12)


def test_heat_dx_odd_factor():
    assert K.kernel_dx(HEAT, 0, 1.0, 0.7, 0.7) == 0.0


def test_potentials():
    assert K.kernel_potential(K.bessel_family(2.0), 0, 4.0) == pytest.approx(-0.5)
    assert K.kernel_potential(LAG1, 0, 1.0) == pytest.approx(0.0)
    assert K.kernel_potential(HEAT, 0, 5.0) == 0.0
    with pytest.raises(DomainError):
        K.kernel_potential(BES1, 0, -1.0)


def test_product_family():
    pb = K.product_family([K.bessel_family(1.0), K.bessel_family(1.0)])
    one_d = (1 - math.exp(-4.0)) / math.sqrt(math.pi)
    assert K.kernel_eval(pb, 0.25, (1.0, 1.0), (1.0, 1.0)).value == \
        pytest.approx(one_d ** 2, rel=1e-12)
    trip = K.product_family([K.bessel_family(1.0), K.laguerre_family(2.0),
                             K.heat_family(1)])
    assert trip.dim == 3
    with pytest.raises(CapabilityError):
        K.product_family([K.heat_family(1)] * 4)


def test_product_dx_selects_factor():
    pb = K.product_family([K.bessel_family(1.0), K.heat_family(1)])
    t, xp, yp = 0.3, (1.0, 0.5), (1.2, -0.3)
    h = 1e-6
    for j in range(2):
        xph = list(xp)
        xmh = list(xp)
        xph[j] += h
        xmh[j] -= h
        fd = (pb.ev(t, xph, yp) - pb.ev(t, xmh, yp)) / (2 * h)
        assert K.kernel_dx(pb, j, t, xp, yp) == pytest.approx(float(fd), rel=1e-6)


def test_half_space_dirichlet_product():
    hd = K.family_from_spec("dirichlet", d=2)
    t = 0.3
    xp, yp = (0.4, 1.0), (-0.2, 0.7)
    expect = float(HEAT.ev(t, 0.4, -0.2) * DIR.ev(t, 1.0, 0.7))
    assert K.kernel_eval(hd, t, xp, yp).value == pytest.approx(expect, rel=1e-13)


def test_domain_rejections():
    with pytest.raises(DomainError):
        K.kernel_eval(BES1, 0.5, -1.0, 1.0)
    with pytest.raises(DomainError):
        K.kernel_eval(BES1, -0.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        K.kernel_eval(DIR, 0.5, 0.0, 1.0)
