"""Coverings, enlargements and partitions against the defining properties."""

import math

import numpy as np
import pytest

from hardyriesz import geometry as g
from hardyriesz.errors import DomainError, UsageError


@pytest.fixture(scope="module")
def qb():
    return g.make_dyadic_covering(-4, 4)


@pytest.fixture(scope="module")
def ql():
    return g.make_laguerre_covering(4, 3)


def test_dyadic_locate(qb):
    assert qb.locate((5.0,)).lo == (4.0,)
    assert qb.locate((5.0,)).hi == (8.0,)
    assert qb.locate((1.0,)).lo == (1.0,)   # boundary point goes right
    assert qb.locate((5.0,)).diameter == 4.0


def test_dyadic_locate_outside(qb):
    with pytest.raises(DomainError):
        qb.locate((-1.0,))


def test_laguerre_cells(ql):
    n1 = sorted((c.lo[0], c.hi[0]) for c in ql.cuboids() if c.index[0] == 1)
    assert n1 == [(2.0, 2.5), (2.5, 3.0), (3.0, 3.5), (3.5, 4.0)]
    assert ql.locate((0.3,)).lo == (0.25,)
    assert ql.locate((0.3,)).hi == (0.5,)
    assert sum(1 for c in ql.cuboids() if c.index[0] == 2) == 16


def test_laguerre_coverage_no_gaps(ql):
    cells = sorted(ql.cuboids(), key=lambda c: c.lo[0])
    for a, b in zip(cells[:-1], cells[1:]):
        assert a.hi[0] == pytest.approx(b.lo[0], rel=1e-14)


def test_enlarge_levels(qb):
    q12 = qb.locate((1.5,))
    e1 = g.enlarge(q12, 1, qb)
    assert e1.lo[0] == pytest.approx(0.9375)
    assert e1.hi[0] == pytest.approx(2.0625)
    e3 = g.enlarge(q12, 3, qb)
    assert e3.radii[0] == pytest.approx(0.5 * (9 / 8) ** 3)
    assert e3.lo[0] > 0.0
    with pytest.raises(UsageError):
        g.enlarge(q12, 4, qb)


def test_kappa_legality_checked_at_construction():
    with pytest.raises(UsageError):
        g.make_dyadic_covering(-2, 2, kappa=1.4)  # kappa^3 crosses neighbours


def test_triple_enlargement_touch_iff_neighbours(qb):
    k3 = qb.kappa ** 3
    cells = qb.cuboids()
    for q1 in cells:
        for q2 in cells:
            if abs(q1.index[0] - q2.index[0]) > 3:
                continue
            assert q1.touches(q2) == q1.scaled(k3).touches(q2.scaled(k3))


def test_finite_overlap_of_triple_enlargements(qb):
    k3 = qb.kappa ** 3
    pts = np.linspace(0.07, 15.9, 1217)
    counts = [sum(1 for q in qb.cuboids() if q.scaled(k3).contains((x,)))
              for x in pts]
    assert max(counts) <= 3


def test_each_point_in_exactly_one_cell(qb, ql):
    rng = np.random.default_rng(3)
    for cov, lo, hi in ((qb, 0.07, 15.9), (ql, 0.07, 15.9)):
        for x in 10 ** rng.uniform(math.log10(lo), math.log10(hi), 200):
            hits = [c for c in cov.cuboids() if c.contains((x,), closed=False)]
            assert len(hits) == 1
            assert cov.locate((x,)).index == hits[0].index


def test_neighbor_diameter_ratio(qb, ql):
    assert qb.neighbor_ratio_bound() == pytest.approx(2.0)
    assert ql.neighbor_ratio_bound() <= 2.0 + 1e-12


def test_product_covering_subdivision(qb):
    pc = g.product_covering(g.make_dyadic_covering(-4, 4),
                            g.make_dyadic_covering(-4, 4))
    q1 = qb.locate((1.5,))
    q2 = qb.locate((5.0,))
    cells = pc._block_cells(q1, q2)
    assert len(cells) == 4
    assert all(c.aspect == pytest.approx(1.0) for c in cells)
    assert len(pc._block_cells(q1, q1)) == 1
    cell = pc.locate((1.5, 5.0))
    assert cell.lo == (1.0, 5.0) and cell.hi == (2.0, 6.0)


def test_strip_covering(qb):
    sc = g.strip_covering(1, g.make_dyadic_covering(-2, 2), n_max=8)
    c = sc.locate((3.5, 1.5))
    assert c.lo == (3.0, 1.0) and c.hi == (4.0, 2.0)
    assert len(sc.neighbors(c)) == 8


def test_partition_sums_to_one(qb, ql):
    pu = g.partition_of_unity(qb)
    rng = np.random.default_rng(11)
    for x in 10 ** rng.uniform(-1, 1.1, 60):
        assert pu.sum_at((x,)) == pytest.approx(1.0, abs=1e-12)
    pul = g.partition_of_unity(ql)
    for x in 10 ** rng.uniform(-1, 0.9, 40):
        assert pul.sum_at((x,)) == pytest.approx(1.0, abs=1e-12)


def test_partition_support_and_core(qb):
    pu = g.partition_of_unity(qb)
    q24 = qb.locate((3.0,))
    assert pu.psi(q24, (3.0,)) == 1.0
    star = q24.scaled(qb.kappa)
    assert pu.psi(q24, (star.hi[0] + 1e-9,)) == 0.0
    vals = [pu.psi(q24, (x,)) for x in np.linspace(1.8, 4.6, 101)]
    assert all(0.0 <= v <= 1.0 for v in vals)


def test_partition_lipschitz_scale_free(qb):
    pu = g.partition_of_unity(qb)
    c = pu.lipschitz_constant()
    assert c <= 21.0
    # same constant at a different window: the bump is scale-covariant
    pu2 = g.partition_of_unity(g.make_dyadic_covering(2, 6))
    assert pu2.lipschitz_constant() == pytest.approx(c, rel=1e-6)


def test_partition_vectorized_matches_scalar(qb):
    pu = g.partition_of_unity(qb)
    keys = [(0,), (1,), (2,)]
    x = np.array([[0.9, 1.4, 2.1], [1.9, 2.5, 4.2], [3.8, 5.0, 8.4]])
    vals = pu.psi_vals_1d(keys, x)
    for i, k in enumerate(keys):
        cell = [c for c in qb.cuboids() if c.index == k][0]
        for j in range(3):
            assert vals[i, j] == pytest.approx(pu.psi(cell, (x[i, j],)),
                                               abs=1e-13)


def test_explicit_covering_gap_detected():
    cells = [g.interval_cuboid(0.0, 1.0, (0,)), g.interval_cuboid(2.0, 3.0, (2,))]
    cov = g.ExplicitCovering(cells, g.Domain(((-math.inf, math.inf),)),
                             check=False)
    with pytest.raises(DomainError):
        cov.locate((1.5,))
