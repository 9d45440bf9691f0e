"""Semigroup kernels T_t(x,y), their spatial derivatives, adapted potentials,
and the decay certificates the quadrature layer needs.

Families: heat on the line, and three half-line operators -- the Bessel
operator -d^2/dx^2 + (b^2-b)/x^2, the harmonic-potential (Laguerre-type)
operator -d^2/dx^2 + x^2 + (b^2-b)/x^2, and the reflection (Dirichlet)
Laplacian.  Multidimensional kernels are products of these one-dimensional
factors.

Everything exponential is kept scaled: the Bessel factor enters as
U_tau(z) = I_tau(z) e^{-z} sqrt(2 pi z), which turns both half-line kernels
into (normalized Gaussian) x (bounded U factor) x (damping), e.g.

    bessel:   T_t(x,y) = U_{b-1/2}(xy/2t) * g_t(x-y)
    laguerre: T_t(x,y) = U_{b-1/2}(xy/sh) * Theta * sqrt(2pi sh)^{-1}
                          * exp(-(x-y)^2/(2 sh)),   sh = sinh(2t)

with g_t(u) = (4 pi t)^{-1/2} exp(-u^2/4t).  No branch switching is needed
for values; derivatives use the analytically differentiated forms (never
finite differences -- those stay in the tests as oracles).

All evaluators broadcast over numpy arrays in (t, x, y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special as sps

from .errors import CapabilityError, DomainError, UsageError
from .geometry import (AdmissibleCovering, Domain, FULL_LINE, HALF_LINE,
                       make_dyadic_covering, make_laguerre_covering,
                       make_unit_covering, product_covering)
from .quadrature import Tail, sum_tails
from .special import ive_safe, sup_scaled_u, sup_scaled_u_over_power

_MOD = "kernels"


class KernelValue(NamedTuple):
    value: float
    log_value: float


def heat_profile(t, u):
    """Normalized 1-d heat kernel g_t(u) = (4 pi t)^{-1/2} e^{-u^2/4t}."""
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    return (4.0 * np.pi * t) ** -0.5 * np.exp(-u * u / (4.0 * t))


def _lower_gamma_piece(q: float, a, t_lo, t_hi=np.inf):
    """integral_{t_lo}^{t_hi} t^{-q} e^{-a/t} dt for q > 1, a >= 0 (exact)."""
    a = np.asarray(a, dtype=float)
    t_lo = np.asarray(t_lo, dtype=float)
    s = q - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            a > 0,
            a ** -s * sps.gamma(s)
            * (sps.gammainc(s, np.where(a > 0, a, 1.0) / t_lo)
               - (0.0 if t_hi is np.inf else
                  sps.gammainc(s, np.where(a > 0, a, 1.0) / t_hi))),
            (t_lo ** -s - (0.0 if t_hi is np.inf else t_hi ** -s)) / s,
        )
    return out


def _log_piece(a: float, t_lo: float, t_hi: float) -> float:
    """integral_{t_lo}^{t_hi} t^{-1} e^{-a/t} dt, exactly (a >= 0)."""
    if a <= 0.0:
        return math.log(t_hi / t_lo)
    lo = float(sps.exp1(a / t_hi))
    hi = float(sps.exp1(a / t_lo)) if a / t_lo < 700 else 0.0
    return lo - hi


@lru_cache(maxsize=64)
def _u_constants(beta: float):
    """(s_minus, s_plus, p_minus, p_plus): certified sup bounds for
    U_{b-1/2}, U_{b+1/2} and their small-argument power quotients."""
    s_m = sup_scaled_u(beta - 0.5)
    s_p = sup_scaled_u(beta + 0.5)
    p_m = sup_scaled_u_over_power(beta - 0.5)
    p_p = sup_scaled_u_over_power(beta + 0.5)
    return s_m, s_p, p_m, p_p


# ---------------------------------------------------------------------------
# one-dimensional families


class Family1D:
    """Shared surface of the one-dimensional kernel families."""

    dim = 1
    domain: Domain
    name: str

    def _check_points(self, x, y, op: str):
        (a, b) = self.domain.intervals[0]
        for v in (x, y):
            v = np.asarray(v)
            if np.any(v <= a) or np.any(v >= b):
                raise DomainError(_MOD, op,
                                  f"point outside the open domain ({a}, {b})")

    @staticmethod
    def _check_time(t, op: str):
        t = np.asarray(t)
        if np.any(t <= 0) or not np.all(np.isfinite(t)):
            raise DomainError(_MOD, op, "time must be finite and > 0")

    def ev(self, t, x, y):
        raise NotImplementedError

    def dx(self, t, x, y):
        raise NotImplementedError

    def ev_log(self, t, x, y):
        raise NotImplementedError

    def minus_heat(self, t, x, y):
        """T_t(x,y) - g_t(x-y), computed as stably as the family allows."""
        raise NotImplementedError

    def dx_minus_heat(self, t, x, y):
        raise NotImplementedError

    def potential(self, x):
        raise NotImplementedError

    potential_kinks: tuple[float, ...] = ()
    has_potential = False

    def natural_covering(self, **kw) -> AdmissibleCovering:
        raise NotImplementedError

    # decay certificates ---------------------------------------------------

    def time_tail_dx(self, x: float, y: float) -> Tail:
        """Tail bounding integral_T^inf |d_x T_t(x,y)| dt/sqrt(t)."""
        raise NotImplementedError

    def time_tail_val(self, x: float, y: float) -> Tail:
        """Tail bounding integral_T^inf T_t(x,y) dt/sqrt(t)."""
        raise NotImplementedError

    def space_tail_dx_local(self, y: float, t_hi: float) -> Tail:
        """Tail in x of integral_0^{t_hi} |d_x T_t(x,y)| dt/sqrt(t)."""
        raise NotImplementedError

    def space_tail_dx_global(self, y: float) -> Tail:
        """Tail in x of integral_0^inf |d_x T_t(x,y)| dt/sqrt(t)."""
        raise NotImplementedError

    def space_tail_sup(self, y: float, delta: float) -> Tail:
        """Tail in x of sup_t t^delta T_t(x,y)."""
        raise NotImplementedError

    def space_tail_potential(self, y: float) -> Tail:
        """Tail in x of |V(x)| integral_0^inf T_t(x,y) dt/sqrt(t)."""
        raise NotImplementedError

    def space_tail_value(self, y: float, t_val: float) -> Tail:
        """Tail in x of T_t(x, y) at fixed t (kernel mass integrals)."""
        raise NotImplementedError

    def riesz_abs_bound(self, x: float, y: float) -> float:
        """Certified upper bound on |R(x,y)| (derivative + potential parts)."""
        out = self.time_tail_dx(x, y)(1e-300)
        if self.has_potential:
            out += abs(float(self.potential(x))) * self.time_tail_val(x, y)(1e-300)
        return out / math.sqrt(math.pi)

    def riesz_integrand(self, t, x, y):
        """(d_x + V(x)) T_t(x,y) without domain checks, for batched loops."""
        out = self.dx(t, x, y)
        if self.has_potential:
            out = out + self.potential(x) * self.ev(t, x, y)
        return out


@dataclass(frozen=True)
class HeatFamily(Family1D):
    """exp(t d^2/dx^2) on the line; the reference family."""

    name: str = "heat"
    domain: Domain = FULL_LINE

    def ev(self, t, x, y):
        self._check_time(t, "kernel_eval")
        return heat_profile(t, np.asarray(x, float) - np.asarray(y, float))

    def ev_log(self, t, x, y):
        t = np.asarray(t, float)
        u = np.asarray(x, float) - np.asarray(y, float)
        return -0.5 * np.log(4.0 * np.pi * t) - u * u / (4.0 * t)

    def dx(self, t, x, y):
        self._check_time(t, "kernel_dx")
        t = np.asarray(t, float)
        u = np.asarray(x, float) - np.asarray(y, float)
        return -u / (2.0 * t) * heat_profile(t, u)

    def minus_heat(self, t, x, y):
        return np.zeros(np.broadcast(t, x, y).shape)

    def dx_minus_heat(self, t, x, y):
        return np.zeros(np.broadcast(t, x, y).shape)

    def potential(self, x):
        return np.zeros(np.shape(x))

    def natural_covering(self, **kw):
        return make_unit_covering(**kw)

    def time_tail_dx(self, x, y):
        r = abs(x - y)
        c = (4.0 * math.pi) ** -0.5

        def bound(T):
            if r == 0.0:
                return math.inf
            # exact: (r/2) c int_T^inf t^{-2} e^{-r^2/4t} dt
            return (2.0 * c / r) * (1.0 - math.exp(-r * r / (4.0 * T)))

        return Tail(bound, "heat dx time tail")

    def time_tail_val(self, x, y):
        return Tail(lambda T: math.inf, "heat value time tail (divergent)")

    def riesz_abs_bound(self, x, y):
        r = abs(x - y)
        return math.inf if r == 0 else 1.0 / (math.pi * r)

    def space_tail_dx_local(self, y, t_hi):
        c = (4.0 * math.pi) ** -0.5

        def bound(rr):
            # G(x) = 2c e^{-r^2/4 t_hi}/r exactly, r = |x - y|
            u0 = rr - abs(y)
            if u0 <= 0:
                return math.inf
            return (2.0 * c / u0) * math.sqrt(math.pi * t_hi) \
                * sps.erfc(u0 / (2.0 * math.sqrt(t_hi)))

        return Tail(bound, "heat dx local space tail")

    def space_tail_value(self, y, t_val):
        def bound(rr):
            u0 = rr - abs(y)
            if u0 <= 0:
                return math.inf
            return 0.5 * sps.erfc(u0 / (2.0 * math.sqrt(t_val)))

        return Tail(bound, "heat value space tail")


@dataclass(frozen=True)
class DirichletFamily(Family1D):
    """Half-line Laplacian with vanishing boundary values, by reflection."""

    name: str = "dirichlet"
    domain: Domain = HALF_LINE

    def ev(self, t, x, y):
        self._check_time(t, "kernel_eval")
        self._check_points(x, y, "kernel_eval")
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return heat_profile(t, x - y) * (-np.expm1(-x * y / t))

    def ev_log(self, t, x, y):
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        u = x - y
        with np.errstate(divide="ignore"):
            return (-0.5 * np.log(4.0 * np.pi * t) - u * u / (4.0 * t)
                    + np.log(-np.expm1(-x * y / t)))

    def dx(self, t, x, y):
        self._check_time(t, "kernel_dx")
        self._check_points(x, y, "kernel_dx")
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        omega = -np.expm1(-x * y / t)
        return heat_profile(t, x - y) * (
            omega * (y - x) / (2.0 * t) + (y / t) * np.exp(-x * y / t))

    def minus_heat(self, t, x, y):
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return -heat_profile(t, x + y)

    def dx_minus_heat(self, t, x, y):
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return (x + y) / (2.0 * t) * heat_profile(t, x + y)

    def potential(self, x):
        return np.zeros(np.shape(x))

    def natural_covering(self, **kw):
        return make_dyadic_covering(**kw)

    def time_tail_dx(self, x, y):
        c = (4.0 * math.pi) ** -0.5

        def bound(T):
            # |d_x T| <= g_t(r) [r min(1, xy/t)/(2t) + y/t]
            return c * (abs(x - y) * x * y / (4.0 * T * T) + y / T)

        return Tail(bound, "dirichlet dx time tail")

    def time_tail_val(self, x, y):
        c = (4.0 * math.pi) ** -0.5

        def bound(T):
            return c * x * y / T

        return Tail(bound, "dirichlet value time tail")

    def riesz_abs_bound(self, x, y):
        r = abs(x - y)
        if r == 0:
            return math.inf
        c = (4.0 * math.pi) ** -0.5 / math.sqrt(math.pi)
        return c * (8.0 * x * y / r ** 3 + 4.0 * y / r ** 2)

    def space_tail_dx_local(self, y, t_hi):
        c = (4.0 * math.pi) ** -0.5

        def bound(rr):
            u0 = rr - y
            if u0 <= 0:
                return math.inf
            # G(x) <= c e^{-r^2/4 t_hi} (2/r + 4 y/r^2)
            amp = c * (2.0 / u0 + 4.0 * y / (u0 * u0))
            return amp * math.sqrt(math.pi * t_hi) \
                * sps.erfc(u0 / (2.0 * math.sqrt(t_hi)))

        return Tail(bound, "dirichlet dx local space tail")

    def space_tail_dx_global(self, y):
        c = (4.0 * math.pi) ** -0.5

        def bound(rr):
            u0 = rr - y
            if u0 <= 0:
                return math.inf
            # int_0^inf |d_x T| dt/sqrt(t) <= c (8xy/r^3 + 4y/r^2)
            return c * (8.0 * y * (1.0 / u0 + y / (2.0 * u0 * u0))
                        + 4.0 * y / u0)

        return Tail(bound, "dirichlet dx global space tail")

    def space_tail_sup(self, y, delta):
        # sup_t t^d T <= xy c (r^2/4)^{d-3/2} ((3/2-d)/e)^{3/2-d}
        c = (4.0 * math.pi) ** -0.5
        e = 1.5 - delta
        k = c * y * 4.0 ** e * (e / math.e) ** e

        def bound(rr):
            u0 = rr - y
            if u0 <= 0:
                return math.inf
            # int_R (u+y) u^{2 delta - 3} du
            return k * (u0 ** (2 * delta - 1) / (1 - 2 * delta)
                        + y * u0 ** (2 * delta - 2) / (2 - 2 * delta))

        return Tail(bound, "dirichlet sup_t space tail")

    def space_tail_potential(self, y):
        return Tail(lambda rr: 0.0, "dirichlet potential tail (V=0)")

    def space_tail_value(self, y, t_val):
        return HeatFamily().space_tail_value(y, t_val)


def _scaled_u(tau, z):
    """U_tau(z) = ive(tau, z) sqrt(2 pi z) with the z -> 0+ limit (= 0 for
    tau > -1/2) patched in, so time underflows never produce inf * 0."""
    z = np.asarray(z, dtype=float)
    safe = np.where(z > 0, z, 1.0)
    with np.errstate(invalid="ignore"):
        out = ive_safe(tau, safe) * np.sqrt(2.0 * np.pi * safe)
    return np.where(z > 0, out, 0.0)


@dataclass(frozen=True)
class BesselFamily(Family1D):
    """-d^2/dx^2 + (b^2 - b)/x^2 on (0, inf), b > 0."""

    beta: float
    name: str = "bessel"
    domain: Domain = HALF_LINE

    def __post_init__(self):
        if not (self.beta > 0) or not math.isfinite(self.beta):
            raise UsageError(_MOD, "bessel", "beta must be positive and finite")

    @property
    def has_potential(self):
        return True

    def _u(self, tau, z):
        return _scaled_u(tau, z)

    def ev(self, t, x, y):
        self._check_time(t, "kernel_eval")
        self._check_points(x, y, "kernel_eval")
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        u = x * y / (2.0 * t)
        return self._u(self.beta - 0.5, u) * heat_profile(t, x - y)

    def ev_log(self, t, x, y):
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        u = x * y / (2.0 * t)
        r = x - y
        with np.errstate(divide="ignore"):
            return (np.log(ive_safe(self.beta - 0.5, u))
                    + 0.5 * np.log(2.0 * np.pi * u)
                    - 0.5 * np.log(4.0 * np.pi * t) - r * r / (4.0 * t))

    def dx(self, t, x, y):
        self._check_time(t, "kernel_dx")
        self._check_points(x, y, "kernel_dx")
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        u = x * y / (2.0 * t)
        up = self._u(self.beta + 0.5, u)
        um = self._u(self.beta - 0.5, u)
        return heat_profile(t, x - y) * (
            y / (2.0 * t) * up + (self.beta / x - x / (2.0 * t)) * um)

    def minus_heat(self, t, x, y):
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        u = x * y / (2.0 * t)
        return (self._u(self.beta - 0.5, u) - 1.0) * heat_profile(t, x - y)

    def dx_minus_heat(self, t, x, y):
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        u = x * y / (2.0 * t)
        up = self._u(self.beta + 0.5, u)
        um = self._u(self.beta - 0.5, u)
        # d_x T - d_x g = g_t(r) [ y/2t (U+ - 1) + b/x U- - x/2t (U- - 1) ]
        return heat_profile(t, x - y) * (
            y / (2.0 * t) * (up - 1.0) + self.beta / x * um
            - x / (2.0 * t) * (um - 1.0))

    def potential(self, x):
        x = np.asarray(x, float)
        return -self.beta / x

    def natural_covering(self, **kw):
        return make_dyadic_covering(**kw)

    def riesz_integrand(self, t, x, y):
        # the adapted derivative cancels the b/x term exactly:
        # (d_x - b/x) T = g_t(x-y) [y U_{b+1/2} - x U_{b-1/2}] / (2t)
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        u = x * y / (2.0 * t)
        return heat_profile(t, x - y) * (
            y * self._u(self.beta + 0.5, u)
            - x * self._u(self.beta - 0.5, u)) / (2.0 * t)

    # certificates built from U- <= min(s_m, p_m u^b), U+ <= min(s_p, p_p u^{b+1})
    # and T weight folded in: |d_x T| t^{-1/2} <= c4 e^{-r^2/4t} *
    #   [ (y U+ /2 + x U- /2) t^{-2} + (b U- /x) t^{-1} ],  c4 = (4 pi)^{-1/2}.

    def _dx_power_tails(self, x, y, t1):
        """u <= 1 block of the dx time tail: integral over t >= t1 >= xy/2."""
        b = self.beta
        _, _, p_m, p_p = _u_constants(b)
        c4 = (4.0 * math.pi) ** -0.5
        xyh = x * y / 2.0
        out = c4 * (y / 2.0) * p_p * xyh ** (b + 1.0) \
            * t1 ** (-b - 2.0) / (b + 2.0)
        out += c4 * p_m * xyh ** b * t1 ** (-b) / x
        out += c4 * (x / 2.0) * p_m * xyh ** b * t1 ** (-b - 1.0) / (b + 1.0)
        return out

    def time_tail_dx(self, x, y):
        b = self.beta
        s_m, s_p, _, _ = _u_constants(b)
        c4 = (4.0 * math.pi) ** -0.5

        def bound(T):
            t1 = max(T, x * y / 2.0)
            out = 0.0
            if t1 > T:  # u >= 1 regime, U <= s, keep the Gaussian factor
                a = (x - y) ** 2 / 4.0
                out += c4 * (y * s_p / 2.0 + x * s_m / 2.0) \
                    * float(_lower_gamma_piece(2.0, a, T, t1))
                out += c4 * (b * s_m / x) * _log_piece(a, T, t1)
            return out + self._dx_power_tails(x, y, t1)

        return Tail(bound, "bessel dx time tail")

    def time_tail_val(self, x, y):
        b = self.beta
        s_m, _, p_m, _ = _u_constants(b)
        c4 = (4.0 * math.pi) ** -0.5

        def bound(T):
            t1 = max(T, x * y / 2.0)
            out = 0.0
            if t1 > T:
                out += c4 * s_m * _log_piece((x - y) ** 2 / 4.0, T, t1)
            out += c4 * p_m * (x * y / 2.0) ** b * t1 ** (-b) / b
            return out

        return Tail(bound, "bessel value time tail")

    def space_tail_dx_local(self, y, t_hi):
        b = self.beta
        s_m, s_p, _, _ = _u_constants(b)
        c4 = (4.0 * math.pi) ** -0.5

        def bound(rr):
            u0 = rr - y
            if u0 <= 0 or rr < 2.0 * y:
                return math.inf
            # G(x) <= c4 e^{-r^2/4 t_hi} [2(y s_p + x s_m)/r^2
            #          + (b s_m/x)(4 t_hi/r^2)]  (E1(z) <= e^{-z}/z)
            amp = c4 * (2.0 * y * s_p / u0 ** 2
                        + 2.0 * s_m * (1.0 + y / u0) / u0
                        + (b * s_m / rr) * 4.0 * t_hi / u0 ** 2)
            return amp * math.sqrt(math.pi * t_hi) \
                * sps.erfc(u0 / (2.0 * math.sqrt(t_hi)))

        return Tail(bound, "bessel dx local space tail")

    def space_tail_dx_global(self, y):
        b = self.beta
        s_m, s_p, p_m, p_p = _u_constants(b)
        c4 = (4.0 * math.pi) ** -0.5

        def bound(rr):
            u0 = rr - y
            if u0 <= 0 or rr < max(2.0 * y, 1.0):
                return math.inf
            # u >= 1 block: every term carries e^{-r^2/2xy} <= e^{-u/3y};
            # prefactors evaluated at u0 are decreasing beyond it
            rate = 1.0 / (3.0 * y) if y > 0 else 1.0
            pref = c4 * (2.0 * y * s_p / u0 ** 2 + 2.0 * b * s_m * y / u0 ** 2
                         + 2.0 * s_m * (1.0 + y / u0) / u0)
            out = pref * math.exp(-rate * u0) / rate
            # u <= 1 block: Gamma-form power envelopes, x <= 1.5u, xy <= 1.5uy
            ca = c4 * 0.5 * p_p * (1.5 * y) ** (b + 1.0) \
                * sps.gamma(b + 2.0) * 4.0 ** (b + 2.0)
            cb = c4 * b * p_m * (1.5 * y / 2.0) ** b \
                * sps.gamma(b) * 4.0 ** b
            cc = c4 * 0.75 * p_m * (1.5 * y / 2.0) ** b \
                * sps.gamma(b + 1.0) * 4.0 ** (b + 1.0)
            out += ca * u0 ** (-b - 2.0) / (b + 2.0)
            out += cb * u0 ** (-b) / b
            out += cc * u0 ** (-b) / b
            return out

        return Tail(bound, "bessel dx global space tail")

    def space_tail_sup(self, y, delta):
        b = self.beta
        _, _, p_m, _ = _u_constants(b)
        if delta >= 0.5 * b:
            raise UsageError(
                _MOD, "space_tail_sup",
                f"sup_t t^delta envelope not integrable for delta={delta} "
                f">= beta/2={0.5 * b}; shrink the delta samples")
        c4 = (4.0 * math.pi) ** -0.5
        e = b + 0.5 - delta
        # sup_t t^{-e} e^{-r^2/4t} = (4e/r^2)^e e^{-e}
        k = c4 * p_m * (1.5 * y / 2.0) ** b * (4.0 * e) ** e * math.exp(-e)
        p = 2.0 * e - b  # g1 <= k' u^{-p}, p = b + 1 - 2 delta > 1

        def bound(rr):
            u0 = rr - y
            if u0 <= 0 or rr < 2.0 * y:
                return math.inf
            return k * u0 ** (1.0 - p) / (p - 1.0)

        return Tail(bound, "bessel sup_t space tail")

    def space_tail_potential(self, y):
        b = self.beta
        s_m, _, p_m, _ = _u_constants(b)
        c4 = (4.0 * math.pi) ** -0.5

        def bound(rr):
            u0 = rr - y
            if u0 <= 0 or rr < max(2.0 * y, 1.0):
                return math.inf
            # t <= xy/2: (b/x) c4 s_m E1(r^2/2xy) <= 4.5 b s_m c4 y/(u^2) e^{-u/3y}
            rate = 1.0 / (3.0 * y) if y > 0 else 1.0
            pref = 4.5 * b * s_m * c4 * y / u0 ** 2
            out = pref * math.exp(-rate * u0) / rate
            # t >= xy/2: (b/x) c4 p_m (xy/2)^b Gamma(b) (4/r^2)^b <= C u^{-b-1}
            cb = b * c4 * p_m * (1.5 * y / 2.0) ** b * sps.gamma(b) * 4.0 ** b
            out += cb * u0 ** (-b) / b
            return out

        return Tail(bound, "bessel potential space tail")

    def space_tail_value(self, y, t_val):
        s_m, _, _, _ = _u_constants(self.beta)
        base = HeatFamily().space_tail_value(y, t_val)
        return Tail(lambda rr: s_m * base(rr), "bessel value space tail")


@dataclass(frozen=True)
class LaguerreFamily(Family1D):
    """-d^2/dx^2 + x^2 + (b^2 - b)/x^2 on (0, inf), b > 0."""

    beta: float
    name: str = "laguerre"
    domain: Domain = HALF_LINE

    def __post_init__(self):
        if not (self.beta > 0) or not math.isfinite(self.beta):
            raise UsageError(_MOD, "laguerre", "beta must be positive and finite")

    @property
    def has_potential(self):
        return True

    @property
    def potential_kinks(self):
        return (math.sqrt(self.beta),)

    def _u(self, tau, z):
        return _scaled_u(tau, z)

    def _pieces(self, t, x, y):
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        with np.errstate(over="ignore"):
            sh = np.sinh(2.0 * t)
        w = x * y / sh
        r = x - y
        # Theta * exp(-r^2/2sh); (1-ch)/(2sh) == -tanh(t)/2 exactly
        expo = -0.5 * np.tanh(t) * (x * x + y * y) - r * r / (2.0 * sh)
        return t, x, y, sh, w, expo

    def ev(self, t, x, y):
        self._check_time(t, "kernel_eval")
        self._check_points(x, y, "kernel_eval")
        t, x, y, sh, w, expo = self._pieces(t, x, y)
        return (2.0 * np.pi * sh) ** -0.5 * self._u(self.beta - 0.5, w) \
            * np.exp(expo)

    def ev_log(self, t, x, y):
        t, x, y, sh, w, expo = self._pieces(t, x, y)
        with np.errstate(divide="ignore"):
            return (np.log(ive_safe(self.beta - 0.5, w))
                    + 0.5 * np.log(2.0 * np.pi * w)
                    - 0.5 * np.log(2.0 * np.pi * sh) + expo)

    def dx(self, t, x, y):
        self._check_time(t, "kernel_dx")
        self._check_points(x, y, "kernel_dx")
        t, x, y, sh, w, expo = self._pieces(t, x, y)
        up = self._u(self.beta + 0.5, w)
        um = self._u(self.beta - 0.5, w)
        # ch/sh evaluated as 1/tanh(2t): overflow-free for every t
        bracket = y / sh * up + (self.beta / x - x / np.tanh(2.0 * t)) * um
        return (2.0 * np.pi * sh) ** -0.5 * np.exp(expo) * bracket

    def minus_heat(self, t, x, y):
        return self.ev(t, x, y) - heat_profile(
            np.asarray(t, float), np.asarray(x, float) - np.asarray(y, float))

    def dx_minus_heat(self, t, x, y):
        t_ = np.asarray(t, float)
        u = np.asarray(x, float) - np.asarray(y, float)
        return self.dx(t, x, y) + u / (2.0 * t_) * heat_profile(t_, u)

    def potential(self, x):
        x = np.asarray(x, float)
        return x - self.beta / x

    def natural_covering(self, **kw):
        return make_laguerre_covering(**kw)

    def riesz_integrand(self, t, x, y):
        # (d_x + x - b/x) T: the b/x and x ch/sh terms combine into
        # [y U_{b+1/2} - x e^{-2t} U_{b-1/2}] / sh(2t)
        t, x, y, sh, w, expo = self._pieces(t, x, y)
        up = self._u(self.beta + 0.5, w)
        um = self._u(self.beta - 0.5, w)
        bracket = (y * up - x * np.exp(-2.0 * t) * um) / sh
        return (2.0 * np.pi * sh) ** -0.5 * np.exp(expo) * bracket

    # certificates.  For t <= 1: 2t <= sh(2t) <= 3.63 t, ch(2t) <= 3.77,
    # exp(-r^2/2sh) <= exp(-r^2/(7.27 t)) and Theta <= exp(-0.76 t (x^2+y^2))
    # (tanh(t) >= 0.76 t on (0,1]).  For t >= 1: sh(2t) >= 0.49 e^{2t},
    # ch/sh <= 1.04 and Theta <= exp(-0.38 (x^2+y^2)).

    _SH_OVER_T = math.sinh(2.0) / 2.0          # 1.8134...
    _TANH_SLOPE = math.tanh(1.0)               # 0.7616

    def _bracket_big_t(self, x, y):
        s_m, s_p, _, _ = _u_constants(self.beta)
        return y * s_p + (self.beta / x + 1.04 * x) * s_m

    def time_tail_dx(self, x, y):
        b = self.beta
        s_m, s_p, _, _ = _u_constants(b)
        th = self._TANH_SLOPE

        def bound(T):
            out = 0.0
            if T < 1.0:
                # valid on [T, 1): sh >= 2t, x ch/sh <= 1.89 x/t, and the
                # Gaussian factor e^{-r^2/2sh} <= e^{-a/t}, a = r^2/7.27
                c = (4.0 * math.pi) ** -0.5
                a = (x - y) ** 2 / 7.27
                a1 = (y * s_p / 2.0 + 1.89 * x * s_m)
                out += c * a1 * float(_lower_gamma_piece(2.0, a, T, 1.0))
                out += c * (b * s_m / x) * _log_piece(a, T, 1.0)
            T1 = max(T, 1.0)
            amp = (2.0 * math.pi * 0.49) ** -0.5 \
                * self._bracket_big_t(x, y) \
                * math.exp(-0.38 * (x * x + y * y))
            return out + amp * math.exp(-T1)

        return Tail(bound, "laguerre dx time tail")

    def time_tail_val(self, x, y):
        b = self.beta
        s_m, _, p_m, _ = _u_constants(b)

        def bound(T):
            out = 0.0
            if T < 1.0:
                c = (4.0 * math.pi) ** -0.5
                a = (x - y) ** 2 / 7.27
                t1 = min(max(T, x * y / 2.0), 1.0)
                if t1 > T:
                    out += c * s_m * _log_piece(a, T, t1)
                if t1 < 1.0:
                    out += c * p_m * (x * y / 2.0) ** b \
                        * (t1 ** -b - 1.0) / b if b > 0 else 0.0
            T1 = max(T, 1.0)
            amp = (2.0 * math.pi * 0.49) ** -0.5 * s_m \
                * math.exp(-0.38 * (x * x + y * y))
            return out + amp * math.exp(-T1)

        return Tail(bound, "laguerre value time tail")

    def space_tail_dx_local(self, y, t_hi):
        # t <= t_hi <= 1: sh in [2t, 3.63t], ch <= 3.77, so
        # |d_x T| t^{-1/2} <= c4 e^{-r^2/(7.27 t)} [ (y s_p/2 + 1.89 x s_m)
        #                     t^{-2} + (b s_m/x) t^{-1} ]
        b = self.beta
        s_m, s_p, _, _ = _u_constants(b)
        if t_hi > 1.01:
            raise UsageError(_MOD, "space_tail_dx_local",
                             "local certificate requires t_hi <= 1")
        c4 = (4.0 * math.pi) ** -0.5
        v = 2.0 * self._SH_OVER_T * 2.0 * t_hi  # 7.27 t_hi

        def bound(rr):
            u0 = rr - y
            if u0 <= 0 or rr < 2.0 * y:
                return math.inf
            # t^{-2} piece integrates to (v/u^2) e^{-u^2/v}; t^{-1} piece to
            # E1(u^2/v) <= (v t_hi/u^2) e^{-u^2/v} / t_hi
            amp = c4 * ((y * s_p / 2.0 + 1.89 * (u0 + y) * s_m) / t_hi
                        + b * s_m / rr) * v / u0 ** 2
            return amp * 0.5 * math.sqrt(math.pi * v) \
                * sps.erfc(u0 / math.sqrt(v))

        return Tail(bound, "laguerre dx local space tail")

    def space_tail_dx_global(self, y):
        b = self.beta
        s_m, s_p, _, _ = _u_constants(b)
        local = self.space_tail_dx_local(y, 1.0)

        def bound(rr):
            if rr < max(2.0 * y, 1.0):
                return math.inf
            u0 = rr - y
            # t <= 1 dominated by the local envelope at t_hi = 1;
            # t >= 1: |d_x T| t^{-1/2} <= 0.57 e^{-t} e^{-0.38(x^2+y^2)}
            #          [y s_p + (b/x + 1.04 x) s_m]
            big = 0.57 * math.exp(-1.0) * math.exp(-0.38 * y * y) \
                * (y * s_p + b * s_m / rr + 1.04 * s_m * (u0 + y + 1.0))
            tail_big = big * math.exp(-0.38 * u0 * u0) / (0.76 * u0)
            return local(rr) + tail_big

        return Tail(bound, "laguerre dx global space tail")

    def space_tail_sup(self, y, delta):
        b = self.beta
        _, _, p_m, _ = _u_constants(b)
        if delta >= 0.5 * b:
            raise UsageError(
                _MOD, "space_tail_sup",
                f"sup_t t^delta envelope not integrable for delta={delta} "
                f">= beta/2={0.5 * b}; shrink the delta samples")
        s_m, _, _, _ = _u_constants(b)
        c4 = (4.0 * math.pi) ** -0.5
        e = b + 0.5 - delta
        # t <= 1: T t^d <= c4 p_m (xy/2)^b t^{d-b-1/2} e^{-r^2/(7.27 t)};
        # sup_t t^{-e} e^{-a/t} = (e/a)^e e^{-e} with a = r^2/7.27
        k = c4 * p_m * (1.5 * y / 2.0) ** b * (7.27 * e) ** e * math.exp(-e)
        p = 2.0 * e - b

        def bound(rr):
            u0 = rr - y
            if u0 <= 0 or rr < max(2.0 * y, 1.0):
                return math.inf
            out = k * u0 ** (1.0 - p) / (p - 1.0)
            # t >= 1: sup_t t^d (2 pi sh)^{-1/2} <= 0.6, Theta gaussian
            out += 0.6 * s_m * math.exp(-0.38 * (y * y + u0 * u0)) \
                / (0.76 * u0)
            return out

        return Tail(bound, "laguerre sup_t space tail")

    def space_tail_potential(self, y):
        b = self.beta
        s_m, _, _, _ = _u_constants(b)

        def bound(rr):
            if rr < max(2.0 * y, 1.0, 2.0 * math.sqrt(b)):
                return math.inf
            u0 = rr - y
            # |V| <= 2x; t <= 1 piece via the AM-GM split
            # e^{-r^2/2sh} Theta <= e^{-0.457 r x} e^{-r^2/(14.54 t)} and
            # int_0^1 t^{-1} e^{-a/t} dt = E1(a); t >= 1 via Theta gaussian.
            c4 = (4.0 * math.pi) ** -0.5
            a = u0 * u0 / 14.54
            e1 = float(sps.exp1(a)) if a < 700 else 0.0
            # pointwise g(x) <= 2x [c4 s_m E1 e^{-0.457 u x} + 0.21 s_m
            #                       e^{-0.38(x^2+y^2)}]
            small_amp = 2.0 * c4 * s_m * e1
            rate = 0.457 * u0  # decay rate in x beyond R
            small = small_amp * (rr + 1.0 / rate) * math.exp(-rate * rr) / rate
            big = 2.0 * 0.21 * s_m * math.exp(-0.38 * (rr * rr + y * y)) / 0.76
            return small + big

        return Tail(bound, "laguerre potential space tail")

    def space_tail_value(self, y, t_val):
        s_m, _, _, _ = _u_constants(self.beta)
        sh = math.sinh(2.0 * t_val)

        def bound(rr):
            u0 = rr - y
            if u0 <= 0:
                return math.inf
            return s_m * (2.0 * math.pi * sh) ** -0.5 \
                * math.sqrt(math.pi * 2.0 * sh) * 0.5 \
                * sps.erfc(u0 / math.sqrt(2.0 * sh))

        return Tail(bound, "laguerre value space tail")


# ---------------------------------------------------------------------------
# products


class ProductFamily:
    """Tensor product of 1-d families: T_t(x,y) = prod_i T^i_t(x_i, y_i)."""

    def __init__(self, factors: Sequence[Family1D]):
        factors = list(factors)
        if not 1 <= len(factors) <= 3:
            raise CapabilityError(_MOD, "product_family",
                                  f"{len(factors)} factors outside the "
                                  "supported 1..3 (desk scale)")
        if any(f.dim != 1 for f in factors):
            raise CapabilityError(_MOD, "product_family",
                                  "factors must be one-dimensional")
        self.factors = factors
        self.domain = factors[0].domain
        for f in factors[1:]:
            self.domain = self.domain.product(f.domain)
        self.name = " x ".join(f.name for f in factors)

    @property
    def dim(self):
        return len(self.factors)

    def _split(self, x):
        x = list(x)
        if len(x) != self.dim:
            raise DomainError(_MOD, "kernel_eval",
                              f"point has {len(x)} coordinates, family has "
                              f"dimension {self.dim}")
        return x

    def ev(self, t, x, y):
        xs, ys = self._split(x), self._split(y)
        out = 1.0
        for f, xi, yi in zip(self.factors, xs, ys):
            out = out * f.ev(t, xi, yi)
        return out

    def ev_log(self, t, x, y):
        xs, ys = self._split(x), self._split(y)
        out = 0.0
        for f, xi, yi in zip(self.factors, xs, ys):
            out = out + f.ev_log(t, xi, yi)
        return out

    def dx(self, t, x, y, j: int = 0):
        xs, ys = self._split(x), self._split(y)
        out = 1.0
        for i, (f, xi, yi) in enumerate(zip(self.factors, xs, ys)):
            out = out * (f.dx(t, xi, yi) if i == j else f.ev(t, xi, yi))
        return out

    def potential(self, x, j: int = 0):
        xs = self._split(x)
        return self.factors[j].potential(xs[j])

    @property
    def has_potential(self):
        return any(f.has_potential for f in self.factors)

    def natural_covering(self, **kw):
        cov = self.factors[0].natural_covering(**kw)
        for f in self.factors[1:]:
            cov = product_covering(cov, f.natural_covering(**kw))
        return cov


KernelFamily = Family1D | ProductFamily


# ---------------------------------------------------------------------------
# module-level operations (the spec surface)


def heat_family(d: int = 1) -> KernelFamily:
    if d == 1:
        return HeatFamily()
    return ProductFamily([HeatFamily() for _ in range(d)])


def bessel_family(beta) -> KernelFamily:
    betas = np.atleast_1d(np.asarray(beta, dtype=float))
    if len(betas) == 1:
        return BesselFamily(float(betas[0]))
    return ProductFamily([BesselFamily(float(b)) for b in betas])


def laguerre_family(beta) -> KernelFamily:
    betas = np.atleast_1d(np.asarray(beta, dtype=float))
    if len(betas) == 1:
        return LaguerreFamily(float(betas[0]))
    return ProductFamily([LaguerreFamily(float(b)) for b in betas])


def dirichlet_family() -> KernelFamily:
    return DirichletFamily()


def product_family(factors: Sequence[KernelFamily]) -> ProductFamily:
    """Tensor product of families; at most 3 one-dimensional factors."""
    flat: list[Family1D] = []
    for f in factors:
        if isinstance(f, ProductFamily):
            flat.extend(f.factors)
        else:
            flat.append(f)
    return ProductFamily(flat)


def family_from_spec(name: str, beta=None, d: int = 1) -> KernelFamily:
    """Build a family from CLI-style identifiers."""
    name = name.lower()
    if name == "heat":
        return heat_family(d)
    if name == "bessel":
        if beta is None:
            raise UsageError(_MOD, "family_from_spec", "bessel needs beta")
        return bessel_family(beta)
    if name == "laguerre":
        if beta is None:
            raise UsageError(_MOD, "family_from_spec", "laguerre needs beta")
        return laguerre_family(beta)
    if name == "dirichlet":
        if d == 1:
            return dirichlet_family()
        return ProductFamily([HeatFamily() for _ in range(d - 1)]
                             + [DirichletFamily()])
    raise UsageError(_MOD, "family_from_spec", f"unknown family {name!r}")


def _as_point(x, d: int):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.shape[0] != d:
        raise DomainError(_MOD, "kernel_eval",
                          f"expected a point with {d} coordinates")
    return arr


def kernel_eval(family: KernelFamily, t: float, x, y) -> KernelValue:
    """T_t(x, y) together with its natural logarithm."""
    if family.dim == 1:
        v = float(family.ev(t, float(np.atleast_1d(x)[0]),
                            float(np.atleast_1d(y)[0])))
        lg = float(family.ev_log(t, float(np.atleast_1d(x)[0]),
                                 float(np.atleast_1d(y)[0])))
    else:
        xs = _as_point(x, family.dim)
        ys = _as_point(y, family.dim)
        if not family.domain.contains(xs) or not family.domain.contains(ys):
            raise DomainError(_MOD, "kernel_eval", "point outside the domain")
        v = float(family.ev(t, xs, ys))
        lg = float(family.ev_log(t, xs, ys))
    return KernelValue(v, lg)


def kernel_dx(family: KernelFamily, j: int, t: float, x, y) -> float:
    """d/dx_j T_t(x, y), analytic form."""
    if family.dim == 1:
        if j != 0:
            raise UsageError(_MOD, "kernel_dx", "coordinate index out of range")
        return float(family.dx(t, float(np.atleast_1d(x)[0]),
                               float(np.atleast_1d(y)[0])))
    if not 0 <= j < family.dim:
        raise UsageError(_MOD, "kernel_dx", "coordinate index out of range")
    xs = _as_point(x, family.dim)
    ys = _as_point(y, family.dim)
    if not family.domain.contains(xs) or not family.domain.contains(ys):
        raise DomainError(_MOD, "kernel_dx", "point outside the domain")
    return float(family.dx(t, xs, ys, j))


def kernel_potential(family: KernelFamily, j: int, x) -> float:
    """V_j(x_j): 0 for heat/dirichlet, -b/x for bessel, x - b/x for laguerre."""
    if family.dim == 1:
        if j != 0:
            raise UsageError(_MOD, "kernel_potential", "index out of range")
        xv = float(np.atleast_1d(x)[0])
        (a, b) = family.domain.intervals[0]
        if not a < xv < b:
            raise DomainError(_MOD, "kernel_potential",
                              f"{xv} outside the open domain")
        return float(family.potential(xv))
    if not 0 <= j < family.dim:
        raise UsageError(_MOD, "kernel_potential", "index out of range")
    xs = _as_point(x, family.dim)
    if not family.domain.contains(xs):
        raise DomainError(_MOD, "kernel_potential", "point outside the domain")
    return float(family.potential(xs, j))
