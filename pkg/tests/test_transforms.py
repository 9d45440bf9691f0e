"""Riesz transforms against the flat-space closed forms, split consistency,
and the maximal function's defining properties."""

import math

import numpy as np
import pytest

from hardyriesz import kernels as K
from hardyriesz import quadrature as q
from hardyriesz import transforms as T
from hardyriesz.errors import DomainError

HEAT = K.heat_family(1)
DIR = K.dirichlet_family()
BES1 = K.bessel_family(1.0)
LAG1 = K.laguerre_family(1.0)


def test_heat_riesz_kernel_closed_form():
    rng = np.random.default_rng(8)
    for _ in range(25):
        x = float(rng.uniform(-4, 4))
        u = float(rng.uniform(0.1, 5) * rng.choice([-1, 1]))
        v = T.riesz_kernel(HEAT, 0, x, x + u)
        assert v == pytest.approx(1.0 / (math.pi * u), abs=1e-9 * (1 + abs(u)))


def test_heat_riesz_antisymmetry():
    for u in (0.3, 1.0, 2.7):
        assert T.riesz_kernel(HEAT, 0, 0.0, u) == pytest.approx(
            -T.riesz_kernel(HEAT, 0, u, 0.0), abs=1e-10)


def test_riesz_kernel_diagonal_rejected():
    with pytest.raises(DomainError):
        T.riesz_kernel(HEAT, 0, 1.0, 1.0)


def test_bessel1_riesz_matches_dirichlet_derivative_part():
    # identical kernels: loc+glob agree; bessel adds its potential part
    for (x, y) in ((1.0, 2.0), (0.5, 0.8), (3.0, 1.2)):
        sb = T.riesz_kernel_split(BES1, 0, 1.0, x, y)
        sd = T.riesz_kernel_split(DIR, 0, 1.0, x, y)
        assert sb.loc + sb.glob == pytest.approx(sd.loc + sd.glob, rel=1e-9)
        assert sd.pot == 0.0


def test_split_reconstitutes_full():
    rng = np.random.default_rng(12)
    for fam in (HEAT, DIR, BES1, LAG1):
        lo = fam.domain.intervals[0][0]
        for _ in range(6):
            x = float(rng.uniform(0.2, 3.0)) if lo == 0 else float(rng.uniform(-3, 3))
            y = x + float(rng.uniform(0.2, 2.0))
            tau = float(rng.uniform(0.3, 3.0))
            s = T.riesz_kernel_split(fam, 0, tau, x, y)
            full = T.riesz_kernel(fam, 0, x, y)
            assert s.total == pytest.approx(full, abs=1e-9 * max(1, abs(full)))


def test_split_limits():
    # tau -> inf: glob -> 0 like 1/(4 pi tau^2), loc -> full (heat)
    s = T.riesz_kernel_split(HEAT, 0, 50.0, 0.0, 1.0)
    assert abs(s.glob) <= 1.01 / (4 * math.pi * 50.0 ** 2)
    assert s.loc == pytest.approx(1.0 / math.pi, rel=1e-4)
    s1 = T.riesz_kernel_split(HEAT, 0, 1.0, 0.0, 1.0)
    assert s1.loc == pytest.approx(math.exp(-0.25) / math.pi, rel=1e-9)


def test_classical_local_kernel_closed_forms():
    assert T.classical_local_riesz_kernel(1.0, 0.0, 1.0) == pytest.approx(
        math.exp(-0.25) / math.pi, rel=1e-12)
    assert T.classical_local_riesz_kernel(1.0, 0.0, 10.0) == pytest.approx(
        math.exp(-25.0) / (10 * math.pi), rel=1e-10)
    assert T.classical_local_riesz_kernel(1e9, 0.0, 1.0) == pytest.approx(
        1.0 / math.pi, rel=1e-9)
    # matches the heat-family local split at matching tau
    s = T.riesz_kernel_split(HEAT, 0, 0.7, 0.3, 1.4)
    assert T.classical_local_riesz_kernel(0.7, 0.3, 1.4) == pytest.approx(
        s.loc, rel=1e-9)


def test_classical_local_kernel_d2_structure():
    # antisymmetric in u_j, Gaussian-truncated beyond tau
    v1 = T.classical_local_riesz_kernel(1.0, (0.0, 0.0), (1.0, 0.5), d=2, j=0)
    v2 = T.classical_local_riesz_kernel(1.0, (1.0, 0.5), (0.0, 0.0), d=2, j=0)
    assert v1 == pytest.approx(-v2, rel=1e-12)
    far = T.classical_local_riesz_kernel(1.0, (0.0, 0.0), (12.0, 0.0), d=2, j=0)
    assert abs(far) < 1e-15


def test_calderon_zygmund_profile_bound():
    # |R~loc(x,y)| <= tau |x-y|^{-2} in d=1 (paper-style CZ bound, checked)
    for tau in (0.5, 1.0, 2.0):
        for u in np.linspace(0.05, 8.0, 50):
            v = abs(T.classical_local_riesz_kernel(tau, 0.0, float(u)))
            assert v <= tau / u ** 2 + 1e-290


def test_riesz_batch_matches_scalar():
    ys = np.array([0.3, 0.9, 1.4, 3.7, 9.0])
    for fam in (DIR, BES1, LAG1):
        bt = T.riesz_batch(fam, 0, 1.0, ys)
        sc = np.array([T.riesz_kernel(fam, 0, 1.0, float(y)) for y in ys])
        scale = np.maximum(np.abs(sc), 1e-12 * np.max(np.abs(sc)))
        assert np.max(np.abs(bt - sc) / scale) < 5e-8


def test_hilbert_pair_via_riesz_apply():
    f = T.from_callable(lambda y: 1.0 / (1.0 + y * y), (-1e6, 1e6), n=241,
                        label="poisson", tail=q.power_tail(1.0, 2.0))
    grid = np.linspace(-5.0, 5.0, 41)
    out = T.riesz_apply(HEAT, 0, f, out_grid=grid)
    expect = -grid / (1.0 + grid * grid)
    assert np.max(np.abs(out.values - expect)) < 1e-6


def test_riesz_apply_parity():
    f = T.from_callable(lambda y: np.exp(-y * y), (-9.0, 9.0), n=121,
                        label="gauss")
    out = T.riesz_apply(HEAT, 0, f, out_grid=np.array([-1.3, 0.0, 1.3]))
    assert abs(out.values[1]) < 1e-10
    assert out.values[0] == pytest.approx(-out.values[2], abs=1e-9)


def test_maximal_translated_heat_profile():
    f = T.from_callable(lambda y: (4 * np.pi) ** -0.5 * np.exp(-y * y / 4),
                        (-12.0, 12.0), n=201, label="H1")
    v = T.maximal_function(HEAT, f, 0.0)
    assert v == pytest.approx((4 * math.pi) ** -0.5, rel=1e-6)


def test_maximal_dominates_members_and_zero():
    f = T.from_callable(lambda y: np.exp(-((y - 1.5) / 0.3) ** 2), (0.3, 2.7),
                        n=101, label="bump")
    cfg = q.DEFAULT_CONFIG
    for x in (0.7, 1.5, 2.2):
        m = T.maximal_function(DIR, f, x)
        for t in (0.01, 0.3, 1.0):
            member = q.integrate_space(lambda y: DIR.ev(t, x, y) * f(y),
                                       0.3, 2.7, cfg).value
            assert m >= member - 1e-10
    z = T.from_callable(lambda y: 0.0 * y, (0.5, 1.5), n=33, label="zero")
    assert T.maximal_function(DIR, z, 1.0) == 0.0


def test_maximal_sublinear():
    f = T.from_callable(lambda y: np.exp(-((y - 1.2) / 0.4) ** 2), (0.2, 2.4),
                        n=81, label="f")
    g = T.from_callable(lambda y: np.exp(-((y - 1.8) / 0.2) ** 2), (1.0, 2.6),
                        n=81, label="g")
    fg = T.from_callable(lambda y: np.exp(-((y - 1.2) / 0.4) ** 2)
                         + np.exp(-((y - 1.8) / 0.2) ** 2), (0.2, 2.6),
                         n=101, label="f+g")
    for x in (0.5, 1.4, 2.3):
        mfg = T.maximal_function(DIR, fg, x)
        msum = T.maximal_function(DIR, f, x) + T.maximal_function(DIR, g, x)
        assert mfg <= msum * (1 + 1e-3)


def test_sampled_function_no_extrapolation():
    sf = T.SampledFunction(np.linspace(0, 1, 11), np.ones(11))
    assert sf(2.0) == 0.0
    assert sf(0.55) == pytest.approx(1.0)
