"""Cuboids, admissible coverings, enlargements and partitions of unity.

A covering is an infinite family described by index formulas (dyadic,
Laguerre-adapted, uniform) or by combining factor coverings (products,
half-space strips).  Each carries a finite enumeration window for sweeps;
``locate`` and ``cells_near`` work anywhere in the domain regardless of the
window.  Containment follows the half-open convention: a point on a shared
face belongs to the cell whose lower face it sits on.

All objects are immutable after construction; construction verifies that the
enlargement factor kappa is legal for the family (triple enlargements of
non-touching cells stay disjoint, and Q*** keeps clear of the boundary).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, UsageError

_MOD = "geometry"

DEFAULT_KAPPA = 9.0 / 8.0


# ---------------------------------------------------------------------------
# domains and cuboids


@dataclass(frozen=True)
class Domain:
    """Product of open intervals, possibly unbounded."""

    intervals: tuple[tuple[float, float], ...]

    @property
    def dim(self) -> int:
        return len(self.intervals)

    def contains(self, x: Sequence[float]) -> bool:
        return all(a < xi < b for xi, (a, b) in zip(x, self.intervals))

    def boundary_distance(self, lo: Sequence[float], hi: Sequence[float]) -> float:
        """Distance from the box [lo, hi] to the complement of the domain."""
        d = math.inf
        for (a, b), lo_i, hi_i in zip(self.intervals, lo, hi):
            if math.isfinite(a):
                d = min(d, lo_i - a)
            if math.isfinite(b):
                d = min(d, b - hi_i)
        return d

    def product(self, other: "Domain") -> "Domain":
        return Domain(self.intervals + other.intervals)


HALF_LINE = Domain((((0.0, math.inf)),))
FULL_LINE = Domain((((-math.inf, math.inf)),))


@dataclass(frozen=True)
class Cuboid:
    """Axis-aligned closed cuboid Q(center, radii) with an index key."""

    center: tuple[float, ...]
    radii: tuple[float, ...]
    index: tuple[int, ...]

    def __post_init__(self):
        if len(self.center) != len(self.radii) or not self.radii:
            raise UsageError(_MOD, "cuboid", "center/radii shape mismatch")
        if any(r <= 0 or not math.isfinite(r) for r in self.radii):
            raise UsageError(_MOD, "cuboid", "radii must be positive and finite")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def lo(self) -> tuple[float, ...]:
        return tuple(c - r for c, r in zip(self.center, self.radii))

    @property
    def hi(self) -> tuple[float, ...]:
        return tuple(c + r for c, r in zip(self.center, self.radii))

    @property
    def diameter(self) -> float:
        return 2.0 * math.sqrt(sum(r * r for r in self.radii))

    @property
    def volume(self) -> float:
        return math.prod(2.0 * r for r in self.radii)

    @property
    def aspect(self) -> float:
        return max(self.radii) / min(self.radii)

    def scaled(self, factor: float) -> "Cuboid":
        return replace(self, radii=tuple(factor * r for r in self.radii))

    def contains(self, x: Sequence[float], closed: bool = True) -> bool:
        if closed:
            return all(abs(xi - c) <= r for xi, c, r in
                       zip(x, self.center, self.radii))
        return all(c - r <= xi < c + r for xi, c, r in
                   zip(x, self.center, self.radii))

    def touches(self, other: "Cuboid") -> bool:
        return all(c1 - r1 <= c2 + r2 and c2 - r2 <= c1 + r1
                   for c1, r1, c2, r2 in zip(self.center, self.radii,
                                             other.center, other.radii))

    def overlap_volume(self, other: "Cuboid") -> float:
        v = 1.0
        for c1, r1, c2, r2 in zip(self.center, self.radii,
                                  other.center, other.radii):
            w = min(c1 + r1, c2 + r2) - max(c1 - r1, c2 - r2)
            if w <= 0:
                return 0.0
            v *= w
        return v


def interval_cuboid(a: float, b: float, index: tuple[int, ...]) -> Cuboid:
    return Cuboid((0.5 * (a + b),), (0.5 * (b - a),), index)


# ---------------------------------------------------------------------------
# one-dimensional index schemes


class _Scheme1D:
    """Formula-backed family of closed intervals partitioning a 1-d domain."""

    domain: Domain
    name: str

    def key_of(self, x: float) -> tuple[int, ...]:
        raise NotImplementedError

    def interval(self, key: tuple[int, ...]) -> tuple[float, float]:
        raise NotImplementedError

    def neighbor_keys(self, key: tuple[int, ...]) -> list[tuple[int, ...]]:
        raise NotImplementedError

    def window_keys(self, window) -> list[tuple[int, ...]]:
        raise NotImplementedError

    def widen(self, window, steps: int = 1):
        raise NotImplementedError


class _DyadicScheme(_Scheme1D):
    """[2^n, 2^{n+1}], n in Z, covering the half-line."""

    domain = HALF_LINE
    name = "dyadic"

    def key_of(self, x):
        if x <= 0:
            raise DomainError(_MOD, "locate", f"{x} outside (0, inf)")
        n = math.floor(math.log2(x))
        # guard against log rounding at the dyadic boundaries
        if 2.0 ** (n + 1) <= x:
            n += 1
        elif 2.0 ** n > x:
            n -= 1
        return (n,)

    def interval(self, key):
        (n,) = key
        return 2.0 ** n, 2.0 ** (n + 1)

    def neighbor_keys(self, key):
        (n,) = key
        return [(n - 1,), (n + 1,)]

    def window_keys(self, window):
        n_min, n_max = window
        return [(n,) for n in range(n_min, n_max + 1)]

    def widen(self, window, steps=1):
        return (window[0] - steps, window[1] + steps)


class _LaguerreScheme(_Scheme1D):
    """Covering adapted to the Laguerre operator.

    Keys (n, k): for n >= 0 the cell [2^n + (k-1) 2^{-n}, 2^n + k 2^{-n}],
    k = 1..4^n; for n < 0 the cell [2^n, 2^{n+1}] (k = 1).
    """

    domain = HALF_LINE
    name = "laguerre"

    def key_of(self, x):
        if x <= 0:
            raise DomainError(_MOD, "locate", f"{x} outside (0, inf)")
        if x < 1.0:
            m = math.floor(-math.log2(x)) + 1
            if 2.0 ** (-m + 1) <= x:
                m -= 1
            elif 2.0 ** (-m) > x:
                m += 1
            if m < 1:  # x rounded up to 1
                return (0, 1)
            return (-m, 1)
        n = math.floor(math.log2(x))
        if 2.0 ** (n + 1) <= x:
            n += 1
        elif 2.0 ** n > x:
            n -= 1
        k = math.floor((x - 2.0 ** n) * 2.0 ** n) + 1
        k = min(max(k, 1), 4 ** n)
        return (n, k)

    def interval(self, key):
        n, k = key
        if n < 0:
            return 2.0 ** n, 2.0 ** (n + 1)
        h = 2.0 ** (-n)
        return 2.0 ** n + (k - 1) * h, 2.0 ** n + k * h

    def neighbor_keys(self, key):
        n, k = key
        out = []
        if n < 0:
            out.append((n - 1, 1))
            out.append((n + 1, 1) if n < -1 else (0, 1))
            return out
        if k > 1:
            out.append((n, k - 1))
        else:
            out.append((n - 1, 4 ** (n - 1)) if n > 0 else (-1, 1))
        if k < 4 ** n:
            out.append((n, k + 1))
        else:
            out.append((n + 1, 1))
        return out

    def window_keys(self, window):
        n_small, n_big = window
        keys = [(-m, 1) for m in range(n_small, 0, -1)]
        for n in range(0, n_big + 1):
            keys.extend((n, k) for k in range(1, 4 ** n + 1))
        return keys

    def widen(self, window, steps=1):
        return (window[0] + steps, window[1] + steps)


class _UniformScheme(_Scheme1D):
    """[n*h, (n+1)*h] covering the whole line, with an optional offset."""

    def __init__(self, length: float = 1.0, offset: float = 0.0):
        if length <= 0:
            raise UsageError(_MOD, "unit_covering", "cell length must be > 0")
        self.length = length
        self.offset = offset
        self.domain = FULL_LINE
        self.name = f"uniform({length})"

    def key_of(self, x):
        return (math.floor((x - self.offset) / self.length),)

    def interval(self, key):
        (n,) = key
        return self.offset + n * self.length, self.offset + (n + 1) * self.length

    def neighbor_keys(self, key):
        (n,) = key
        return [(n - 1,), (n + 1,)]

    def window_keys(self, window):
        n_min, n_max = window
        return [(n,) for n in range(n_min, n_max + 1)]

    def widen(self, window, steps=1):
        span = window[1] - window[0] + 1
        pad = max(1, (span * (2 ** steps - 1)) // 2)
        return (window[0] - pad, window[1] + pad)


# ---------------------------------------------------------------------------
# coverings


class AdmissibleCovering:
    """Common interface: cells in a window plus formula-based queries."""

    domain: Domain
    kappa: float
    name: str

    @property
    def dim(self) -> int:
        return self.domain.dim

    def cuboids(self) -> list[Cuboid]:
        raise NotImplementedError

    def locate(self, x: Sequence[float]) -> Cuboid:
        raise NotImplementedError

    def neighbors(self, q: Cuboid) -> list[Cuboid]:
        raise NotImplementedError

    def cells_near(self, x: Sequence[float]) -> list[Cuboid]:
        """Cells whose enlargement Q* can contain x (locate + neighbors)."""
        q = self.locate(x)
        return [q] + self.neighbors(q)

    def widened(self, steps: int = 1) -> "AdmissibleCovering":
        raise NotImplementedError

    # recorded comparability constants, measured over the window
    def aspect_constant(self) -> float:
        return max(q.aspect for q in self.cuboids())

    def neighbor_ratio_bound(self) -> float:
        best = 1.0
        for q in self.cuboids():
            for r in self.neighbors(q):
                best = max(best, q.diameter / r.diameter,
                           r.diameter / q.diameter)
        return best

    def _ring2(self, q: Cuboid) -> list[Cuboid]:
        """Touching and next-nearest cells, used by the kappa legality check."""
        ring = {}
        nbrs = self.neighbors(q)
        for r in nbrs:
            ring[r.index] = r
        for r in nbrs:
            for s in self.neighbors(r):
                if s.index != q.index:
                    ring.setdefault(s.index, s)
        return list(ring.values())

    def _kappa_sample(self) -> list[Cuboid]:
        cells = self.cuboids()
        if len(cells) <= 24:
            return cells
        step = max(1, len(cells) // 24)
        return cells[::step]

    def _check_kappa(self):
        k3 = self.kappa ** 3
        if not 1.0 < self.kappa < 1.5:
            raise UsageError(_MOD, "covering",
                             f"kappa={self.kappa} outside the supported (1, 1.5)")
        for q in self._kappa_sample():
            big = q.scaled(k3)
            if self.domain.boundary_distance(big.lo, big.hi) <= 0:
                raise UsageError(_MOD, "covering",
                                 f"kappa^3 pushes {q.index} outside the domain")
            for r in self._ring2(q):
                touch = q.touches(r)
                touch3 = big.touches(r.scaled(k3))
                if touch != touch3:
                    raise UsageError(
                        _MOD, "covering",
                        f"kappa={self.kappa} breaks the triple-enlargement "
                        f"neighbour condition for {q.index} vs {r.index}")


class Covering1D(AdmissibleCovering):
    def __init__(self, scheme: _Scheme1D, window, kappa: float = DEFAULT_KAPPA):
        self.scheme = scheme
        self.window = window
        self.kappa = float(kappa)
        self.domain = scheme.domain
        self.name = scheme.name
        self._cells = None
        self._check_kappa()

    def _cell(self, key) -> Cuboid:
        a, b = self.scheme.interval(key)
        return interval_cuboid(a, b, key)

    def cuboids(self):
        if self._cells is None:
            self._cells = [self._cell(k) for k in self.scheme.window_keys(self.window)]
        return self._cells

    def bounds_arrays(self):
        """(lo, hi) arrays over the window, for vectorized sweeps."""
        cells = self.cuboids()
        lo = np.array([q.lo[0] for q in cells])
        hi = np.array([q.hi[0] for q in cells])
        return lo, hi

    def locate(self, x):
        if np.ndim(x):
            (x,) = x
        if not self.domain.contains((x,)):
            raise DomainError(_MOD, "locate", f"{x} outside the domain")
        return self._cell(self.scheme.key_of(float(x)))

    def neighbors(self, q):
        return [self._cell(k) for k in self.scheme.neighbor_keys(q.index)]

    def widened(self, steps=1):
        return Covering1D(self.scheme, self.scheme.widen(self.window, steps),
                          self.kappa)


def make_dyadic_covering(n_min: int = -4, n_max: int = 4,
                         kappa: float = DEFAULT_KAPPA) -> Covering1D:
    """Dyadic covering [2^n, 2^{n+1}] of (0, inf), windowed to n in [n_min, n_max]."""
    return Covering1D(_DyadicScheme(), (n_min, n_max), kappa)


def make_laguerre_covering(n_small: int = 4, n_big: int = 3,
                           kappa: float = DEFAULT_KAPPA) -> Covering1D:
    """Laguerre-adapted covering of (0, inf).

    Window: the small cells [2^{-m}, 2^{-m+1}], m = 1..n_small, plus the
    subdivided blocks [2^n, 2^{n+1}], n = 0..n_big.
    """
    return Covering1D(_LaguerreScheme(), (n_small, n_big), kappa)


def make_unit_covering(length: float = 1.0, n_min: int = -8, n_max: int = 7,
                       kappa: float = DEFAULT_KAPPA,
                       offset: float = 0.0) -> Covering1D:
    """Uniform covering of the line by cells of a fixed length."""
    return Covering1D(_UniformScheme(length, offset), (n_min, n_max), kappa)


class ProductCovering(AdmissibleCovering):
    """Product-adapted covering: subdivide Q1 x Q2 into near-cubes whose
    sides are comparable to min(side(Q1), side(Q2))."""

    def __init__(self, c1: AdmissibleCovering, c2: AdmissibleCovering,
                 kappa: float | None = None):
        self.c1 = c1
        self.c2 = c2
        self.kappa = float(kappa if kappa is not None else
                           min(c1.kappa, c2.kappa))
        self.domain = c1.domain.product(c2.domain)
        self.name = f"{c1.name} x {c2.name}"
        self._cells = None
        self._check_kappa()

    # -- block/subcell arithmetic

    @staticmethod
    def _subdivision(q1: Cuboid, q2: Cuboid):
        side = min(min(2 * r for r in q1.radii), min(2 * r for r in q2.radii))
        counts = tuple(max(1, round(2 * r / side))
                       for r in q1.radii + q2.radii)
        return side, counts

    def _subcell(self, q1: Cuboid, q2: Cuboid, sub: tuple[int, ...]) -> Cuboid:
        _, counts = self._subdivision(q1, q2)
        lo = q1.lo + q2.lo
        radii = q1.radii + q2.radii
        c, r = [], []
        for lo_i, r_i, m, j in zip(lo, radii, counts, sub):
            h = 2 * r_i / m
            c.append(lo_i + (j + 0.5) * h)
            r.append(0.5 * h)
        index = q1.index + q2.index + sub
        return Cuboid(tuple(c), tuple(r), index)

    def _block_cells(self, q1: Cuboid, q2: Cuboid) -> list[Cuboid]:
        _, counts = self._subdivision(q1, q2)
        out = []

        def rec(prefix):
            if len(prefix) == len(counts):
                out.append(self._subcell(q1, q2, tuple(prefix)))
                return
            for j in range(counts[len(prefix)]):
                rec(prefix + [j])

        rec([])
        return out

    def cuboids(self):
        if self._cells is None:
            cells = []
            for q1 in self.c1.cuboids():
                for q2 in self.c2.cuboids():
                    cells.extend(self._block_cells(q1, q2))
            self._cells = cells
        return self._cells

    def locate(self, x):
        d1 = self.c1.dim
        x1, x2 = tuple(x[:d1]), tuple(x[d1:])
        q1 = self.c1.locate(x1 if d1 > 1 else x1[0:1])
        q2 = self.c2.locate(x2 if len(x2) > 1 else x2[0:1])
        _, counts = self._subdivision(q1, q2)
        sub = []
        for xi, lo_i, r_i, m in zip(tuple(x), q1.lo + q2.lo,
                                    q1.radii + q2.radii, counts):
            h = 2 * r_i / m
            sub.append(min(m - 1, max(0, math.floor((xi - lo_i) / h))))
        return self._subcell(q1, q2, tuple(sub))

    def _candidate_blocks(self, q1: Cuboid, q2: Cuboid):
        b1 = [q1] + self.c1.neighbors(q1)
        b2 = [q2] + self.c2.neighbors(q2)
        return [(a, b) for a in b1 for b in b2]

    def _factor_blocks(self, q: Cuboid):
        d1 = self.c1.dim
        mid = tuple(q.center)
        q1 = self.c1.locate(mid[:d1])
        q2 = self.c2.locate(mid[d1:])
        return q1, q2

    def _block_cells_in_box(self, q1: Cuboid, q2: Cuboid, lo, hi) -> list[Cuboid]:
        """Subcells of the block Q1 x Q2 meeting the box [lo, hi]."""
        _, counts = self._subdivision(q1, q2)
        blo = q1.lo + q2.lo
        radii = q1.radii + q2.radii
        ranges = []
        for lo_i, hi_i, blo_i, r_i, m in zip(lo, hi, blo, radii, counts):
            h = 2 * r_i / m
            j0 = max(0, math.floor((lo_i - blo_i) / h - 1e-12))
            j1 = min(m - 1, math.floor((hi_i - blo_i) / h + 1e-12))
            if j1 < j0:
                return []
            ranges.append(range(j0, j1 + 1))
        out = []

        def rec(prefix):
            if len(prefix) == len(ranges):
                out.append(self._subcell(q1, q2, tuple(prefix)))
                return
            for j in ranges[len(prefix)]:
                rec(prefix + [j])

        rec([])
        return out

    def neighbors(self, q):
        q1, q2 = self._factor_blocks(q)
        pad = 0.25 * min(q.radii)
        lo = tuple(v - pad for v in q.lo)
        hi = tuple(v + pad for v in q.hi)
        out = []
        for b1, b2 in self._candidate_blocks(q1, q2):
            for cell in self._block_cells_in_box(b1, b2, lo, hi):
                if cell.index != q.index and cell.touches(q):
                    out.append(cell)
        return out

    def widened(self, steps=1):
        return ProductCovering(self.c1.widened(steps), self.c2.widened(steps),
                               self.kappa)


class StripCovering(AdmissibleCovering):
    """Covering of R^{d1} x X2: strips R^{d1} x Q2 split into cuboids whose
    line-factor sides equal the diameter of Q2."""

    def __init__(self, d1: int, c2: AdmissibleCovering, n_max: int = 8,
                 kappa: float | None = None):
        if d1 < 1:
            raise UsageError(_MOD, "strip_covering", "d1 must be >= 1")
        self.d1 = d1
        self.c2 = c2
        self.n_max = n_max
        self.kappa = float(kappa if kappa is not None else c2.kappa)
        line = Domain(tuple((-math.inf, math.inf) for _ in range(d1)))
        self.domain = line.product(c2.domain)
        self.name = f"R^{d1} x {c2.name}"
        self._cells = None
        self._check_kappa()

    def _strip_side(self, q2: Cuboid) -> float:
        return q2.diameter

    def _cell(self, ns: tuple[int, ...], q2: Cuboid) -> Cuboid:
        h = self._strip_side(q2)
        c = tuple((n + 0.5) * h for n in ns)
        r = tuple(0.5 * h for _ in ns)
        return Cuboid(c + q2.center, r + q2.radii, ns + q2.index)

    def cuboids(self):
        if self._cells is None:
            cells = []
            rng = range(-self.n_max, self.n_max)
            for q2 in self.c2.cuboids():
                def rec(prefix):
                    if len(prefix) == self.d1:
                        cells.append(self._cell(tuple(prefix), q2))
                        return
                    for n in rng:
                        rec(prefix + [n])
                rec([])
            self._cells = cells
        return self._cells

    def locate(self, x):
        x1, x2 = tuple(x[:self.d1]), tuple(x[self.d1:])
        q2 = self.c2.locate(x2)
        h = self._strip_side(q2)
        ns = tuple(math.floor(xi / h) for xi in x1)
        return self._cell(ns, q2)

    def neighbors(self, q):
        x2 = q.center[self.d1:]
        q2 = self.c2.locate(x2)
        ns = q.index[:self.d1]
        out = []
        for b2 in [q2] + self.c2.neighbors(q2):
            h = self._strip_side(b2)
            lo = [q.center[i] - q.radii[i] for i in range(self.d1)]
            hi = [q.center[i] + q.radii[i] for i in range(self.d1)]
            n_lo = [math.floor(l / h + 1e-12) - 1 for l in lo]
            n_hi = [math.floor(u / h - 1e-12) + 1 for u in hi]

            def rec(prefix):
                if len(prefix) == self.d1:
                    cell = self._cell(tuple(prefix), b2)
                    if cell.index != q.index and cell.touches(q):
                        out.append(cell)
                    return
                i = len(prefix)
                for n in range(n_lo[i], n_hi[i] + 1):
                    rec(prefix + [n])

            rec([])
        return out

    def widened(self, steps=1):
        return StripCovering(self.d1, self.c2.widened(steps),
                             self.n_max * (2 ** steps), self.kappa)


def product_covering(c1: AdmissibleCovering,
                     c2: AdmissibleCovering) -> ProductCovering:
    """Product-adapted covering of X1 x X2 (see ProductCovering)."""
    return ProductCovering(c1, c2)


def strip_covering(d1: int, c2: AdmissibleCovering,
                   n_max: int = 8) -> StripCovering:
    """Covering of R^{d1} x X2 by strips split at the scale of each Q2."""
    return StripCovering(d1, c2, n_max)


class ExplicitCovering(AdmissibleCovering):
    """Covering given by an explicit finite cell list (tests, dumps)."""

    def __init__(self, cells: Iterable[Cuboid], domain: Domain,
                 kappa: float = DEFAULT_KAPPA, check: bool = True):
        self._cells = list(cells)
        self.domain = domain
        self.kappa = float(kappa)
        self.name = "explicit"
        if check:
            self._check_kappa()

    def cuboids(self):
        return self._cells

    def locate(self, x):
        x = tuple(x) if np.ndim(x) else (float(x),)
        hits = [q for q in self._cells if q.contains(x)]
        if not hits:
            raise DomainError(_MOD, "locate", f"{x} not covered")
        return min(hits, key=lambda q: q.center)

    def neighbors(self, q):
        return [r for r in self._cells if r.index != q.index and r.touches(q)]

    def widened(self, steps=1):
        return self


def enlarge(q: Cuboid, level: int, covering: AdmissibleCovering) -> Cuboid:
    """Q*, Q** or Q***: radii scaled by kappa^level.

    The covering's kappa was validated at construction, so every level up
    to 3 keeps the enlargement inside the domain and preserves the
    touching-iff-triple-enlargements-intersect property.
    """
    if level not in (1, 2, 3):
        raise UsageError(_MOD, "enlarge", f"level must be 1, 2 or 3, got {level}")
    return q.scaled(covering.kappa ** level)


# ---------------------------------------------------------------------------
# partition of unity


def _smoothstep(w):
    w = np.clip(w, 0.0, 1.0)
    return w * w * (3.0 - 2.0 * w)


def _smoothstep_d(w):
    inside = (w > 0.0) & (w < 1.0)
    return np.where(inside, 6.0 * np.clip(w, 0.0, 1.0)
                    * (1.0 - np.clip(w, 0.0, 1.0)), 0.0)


def bump_1d(x, lo, hi, kappa):
    """C^1 bump: 1 on the kappa^{-1}-shrunken core of [lo, hi], 0 outside
    the kappa-enlargement, cubic ramp in between.  Vectorized in x/lo/hi."""
    c = 0.5 * (np.asarray(lo) + np.asarray(hi))
    r = 0.5 * (np.asarray(hi) - np.asarray(lo))
    u = np.abs(np.asarray(x, dtype=float) - c)
    inner = r / kappa
    outer = r * kappa
    return _smoothstep((outer - u) / (outer - inner))


def bump_1d_dx(x, lo, hi, kappa):
    c = 0.5 * (np.asarray(lo) + np.asarray(hi))
    r = 0.5 * (np.asarray(hi) - np.asarray(lo))
    diff = np.asarray(x, dtype=float) - c
    u = np.abs(diff)
    inner = r / kappa
    outer = r * kappa
    w = (outer - u) / (outer - inner)
    return _smoothstep_d(w) * (-np.sign(diff)) / (outer - inner)


class PartitionOfUnity:
    """Family {psi_Q}: nonnegative C^1 bumps subordinate to {Q*} summing to 1.

    The raw bump of each cell is the tensor cubic ramp above; psi_Q divides
    by the local sum of raw bumps, which is bounded away from zero on the
    whole domain, so the family sums to 1 exactly (up to rounding).
    """

    def __init__(self, covering: AdmissibleCovering):
        self.covering = covering
        self.kappa = covering.kappa
        self._lip = None

    def _raw(self, q: Cuboid, x) -> float:
        val = 1.0
        for xi, lo_i, hi_i in zip(x, q.lo, q.hi):
            val *= float(bump_1d(xi, lo_i, hi_i, self.kappa))
            if val == 0.0:
                return 0.0
        return val

    def _raw_grad(self, q: Cuboid, x, j: int) -> float:
        val = 1.0
        for i, (xi, lo_i, hi_i) in enumerate(zip(x, q.lo, q.hi)):
            f = (bump_1d_dx if i == j else bump_1d)(xi, lo_i, hi_i, self.kappa)
            val *= float(f)
        return val

    def _local(self, x):
        return self.covering.cells_near(x)

    def psi(self, q: Cuboid, x) -> float:
        """psi_Q(x) for x in the domain; 0 outside supp(psi_Q) = Q*."""
        x = tuple(x) if np.ndim(x) else (float(x),)
        num = self._raw(q, x)
        if num == 0.0:
            return 0.0
        den = sum(self._raw(c, x) for c in self._local(x))
        return num / den

    def psi_dx(self, q: Cuboid, x, j: int = 0) -> float:
        x = tuple(x) if np.ndim(x) else (float(x),)
        cells = self._local(x)
        s = sum(self._raw(c, x) for c in cells)
        ds = sum(self._raw_grad(c, x, j) for c in cells)
        b = self._raw(q, x)
        db = self._raw_grad(q, x, j)
        return (db * s - b * ds) / (s * s)

    def sum_at(self, x) -> float:
        x = tuple(x) if np.ndim(x) else (float(x),)
        return sum(self.psi(c, x) for c in self._local(x))

    def psi_vals_1d(self, keys, x):
        """Vectorized psi_Q(x) for a batch of 1-d cells.

        ``keys`` is a sequence of scheme keys (one cell per row) and ``x`` an
        array broadcastable against rows -- typically quadrature nodes inside
        each cell's Q*.  For kappa < 1.5 only a cell and its two scheme
        neighbours can be nonzero at such nodes, so the local sum uses
        exactly those three bumps.
        """
        cov = self.covering
        if not isinstance(cov, Covering1D):
            raise UsageError(_MOD, "psi_vals_1d", "1-d formula coverings only")
        scheme = cov.scheme
        bounds = []
        for k in keys:
            row = [scheme.interval(k)]
            row += [scheme.interval(kk) for kk in scheme.neighbor_keys(k)]
            while len(row) < 3:
                row.append(row[0])
            bounds.append(row[:3])
        b = np.asarray(bounds)  # (cells, 3, 2)
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        num = bump_1d(x, b[:, 0, 0, None], b[:, 0, 1, None], self.kappa)
        den = num.copy()
        for j in (1, 2):
            den = den + bump_1d(x, b[:, j, 0, None], b[:, j, 1, None], self.kappa)
        return np.where(num > 0, num / np.where(den > 0, den, 1.0), 0.0)

    def lipschitz_constant(self) -> float:
        """Measured sup over window cells of |psi_Q'| * d_Q (1-d factorwise)."""
        if self._lip is None:
            best = 0.0
            for q in self.covering.cuboids():
                star = q.scaled(self.kappa)
                for j in range(q.dim):
                    ts = np.linspace(star.lo[j], star.hi[j], 181)
                    for t in ts:
                        x = list(q.center)
                        x[j] = float(t)
                        if not self.covering.domain.contains(x):
                            continue
                        best = max(best, abs(self.psi_dx(q, x, j)) * q.diameter)
            self._lip = best
        return self._lip


def partition_of_unity(covering: AdmissibleCovering) -> PartitionOfUnity:
    """Partition of unity subordinate to {Q*} (see PartitionOfUnity)."""
    return PartitionOfUnity(covering)
