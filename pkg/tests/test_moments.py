import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isomoment.cover import build_cover
from isomoment.curve import parse_spec, sample
from isomoment.moments import (MomentError, centroid, disk_reference, domain_moment, domain_moment_direct, p_moment,
                               verify_isomom, wirtinger_check)
from isomoment.offset import parallel_set
from isomoment.trace import Piece, doubly_covered_segment, polyline_pieces

from conftest import PEANUT


def circle_pieces(r, center=(0.0, 0.0), n=2048):
    th = np.linspace(0, 2 * math.pi, n, endpoint=False)
    pts = np.column_stack((center[0] + r * np.cos(th), center[1] + r * np.sin(th)))
    return [Piece(pts, np.full(n, 2 * math.pi * r / n))]


def test_centroid_of_shifted_circle():
    assert np.allclose(centroid(circle_pieces(1.5, (2.0, 3.0))), [2.0, 3.0], atol=1e-9)


def test_centroid_of_symmetric_set(peanut, peanut_ri):
    ps = parallel_set(peanut, 0.5, peanut_ri)
    assert np.hypot(*centroid(ps)) <= 1e-8


def test_centroid_zero_length():
    with pytest.raises(MomentError):
        centroid([Piece(np.zeros((2, 2)), np.zeros(2))])


def test_centroid_against_refined_quadrature(peanut, peanut_ri):
    # centroid of a non-symmetric piece of S_t, against an 8x denser polyline rule
    ps = parallel_set(peanut, 0.5, peanut_ri)
    ua, ub = ps.u_intervals[0]
    u = np.linspace(ua, 0.5 * (ua + ub), 8 * 4096 + 1)
    pts = peanut.offset(u, 0.5)
    mid = 0.5 * (pts[1:] + pts[:-1])
    w = np.hypot(*np.diff(pts, axis=0).T)
    oracle = (w @ mid) / w.sum()
    from isomoment.quadrature import panel_nodes

    nodes, gw = panel_nodes(ua, 0.5 * (ua + ub), 2 * math.pi / 256)
    _, d1, _ = peanut.geometry.eval(nodes)
    weights = gw * (np.hypot(*d1.T) - 0.5 * peanut.geometry.kappa_speed(nodes))
    c = centroid([Piece(peanut.offset(nodes, 0.5), weights)])
    assert np.allclose(c, oracle, atol=1e-7)


def test_circle_second_moment():
    assert abs(p_moment(circle_pieces(0.7), 2) - 2 * math.pi * 0.7**3) <= 1e-8


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 3.3])
def test_disk_level_moment(disk, p):
    t = 0.35
    ps = parallel_set(disk, t, 1.0)
    assert abs(p_moment(ps, p, centroid(ps)) - disk_reference(disk.length, t, p)) <= 1e-7


def test_doubly_covered_segment_moment():
    # two passes over [-1/4, 1/4]: 2 * 2 * (1/4)^5 / 5 = (1/4)^4 / 5
    assert abs(p_moment(doubly_covered_segment(), 4) - 0.25**4 / 5) <= 1e-10
    assert abs(p_moment(doubly_covered_segment(), 4) - 7.8125e-4) <= 1e-10


def test_parallel_axis_identity(peanut, peanut_ri):
    ps = parallel_set(peanut, 0.2, peanut_ri)
    c = centroid(ps)
    for q in ([0.3, -0.1], [1.0, 2.0], [-0.5, 0.0]):
        lhs = p_moment(ps, 2, q)
        rhs = p_moment(ps, 2, c) + ps.length * np.sum((np.asarray(q) - c) ** 2)
        assert abs(lhs - rhs) <= 1e-8 * max(1.0, lhs)


def test_verify_isomom_disk(disk):
    reports = verify_isomom(disk, [0.1, 0.5, 0.9], 2.0, 1.0)
    for r in reports:
        assert r.regular and r.passed
        assert abs(r.margin) <= 1e-7
        assert abs(r.condition_lhs - r.condition_rhs) <= 1e-7


def test_verify_isomom_ellipse(ellipse, ellipse_ri):
    (r,) = verify_isomom(ellipse, [0.2], 2.0, ellipse_ri)
    assert r.margin > 0 and r.passed


def test_verify_isomom_peanut_p1(peanut, peanut_ri):
    (r,) = verify_isomom(peanut, [0.5], 1.0, peanut_ri)
    assert r.n_components == 2
    assert r.margin > 0 and r.passed
    assert r.condition_passed


def test_verify_isomom_rejects_large_p(disk):
    with pytest.raises(MomentError):
        verify_isomom(disk, [0.1], 2.5, 1.0)


def test_jensen_consistency(peanut, peanut_ri):
    for t in (0.1, 0.5):
        ps = parallel_set(peanut, t, peanut_ri)
        c = centroid(ps)
        m2 = p_moment(ps, 2, c)
        for p in (0.5, 1.0, 1.5):
            assert p_moment(ps, p, c) ** (2 / p) <= ps.length ** (2 / p - 1) * m2 + 1e-10


def test_scaling_law(peanut_ri):
    base = sample(parse_spec(PEANUT))
    big = sample(parse_spec(PEANUT).scaled(3.0))
    p, t = 1.5, 0.4
    a = parallel_set(base, t, peanut_ri)
    b = parallel_set(big, 3 * t, 3 * peanut_ri)
    ma = p_moment(a, p, centroid(a))
    mb = p_moment(b, p, centroid(b))
    assert np.isclose(mb, 3 ** (p + 1) * ma, rtol=1e-9)
    assert np.isclose(disk_reference(big.length, 3 * t, p), 3 ** (p + 1) * disk_reference(base.length, t, p))


def test_wirtinger_circle(disk):
    lhs, rhs = wirtinger_check(disk)
    assert abs(lhs - rhs) <= 1e-8
    assert abs(lhs - 2 * math.pi) <= 1e-8


def test_wirtinger_ellipse(ellipse):
    lhs, rhs = wirtinger_check(ellipse)
    assert lhs < rhs


def test_wirtinger_cover(peanut, peanut_ri):
    cc = build_cover(parallel_set(peanut, 0.5, peanut_ri), peanut)
    lhs, rhs = wirtinger_check(cc)
    assert lhs <= rhs + 1e-8 * peanut.length**3
    # the cover moment dominates the S_t moment about the cover centroid
    assert p_moment(cc.parallel_set, 2, centroid(cc)) <= lhs


def test_wirtinger_polygon_is_translation_invariant():
    pts = np.random.default_rng(0).normal(size=(9, 2))
    a = wirtinger_check(pts)
    b = wirtinger_check(pts + [5.0, -3.0])
    assert np.allclose(a, b, rtol=1e-10)
    assert a[0] <= a[1]


def test_domain_moment_disk(disk):
    direct, co = domain_moment(disk, r_i=1.0)
    assert abs(direct - math.pi / 2) <= 1e-10
    assert abs(co - math.pi / 2) <= 1e-6


def test_domain_moment_green_vs_polar(peanut):
    # Green's theorem on the xy form of the same curve against the polar formula
    from isomoment.curve import ClosedCurveSpec, sample as resample

    direct = domain_moment_direct(peanut)
    a0, c2 = 1.0, 0.7
    # r cos(theta) with r = 1 + 0.7 cos 2 theta: x = cos + 0.35 (cos 3 + cos), y = sin + 0.35 (sin 3 - sin)
    xy = ClosedCurveSpec(kind="fourier_xy", x_series=(0.0, (a0 + c2 / 2, 0.0, c2 / 2), ()),
                         y_series=(0.0, (), (a0 - c2 / 2, 0.0, c2 / 2)))
    assert abs(domain_moment_direct(resample(xy)) - direct) <= 1e-10


def test_domain_moment_polygon():
    sq = sample(parse_spec({"kind": "polyline", "vertices": [[-1, -1], [1, -1], [1, 1], [-1, 1]]}), 1024)
    assert abs(domain_moment_direct(sq) - 8.0 / 3.0) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 40))
def test_wirtinger_random_polygons(seed, n):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 2)) * rng.uniform(0.1, 10)
    lhs, rhs = wirtinger_check(pts)
    L = sum(p.length for p in polyline_pieces(pts))
    assert lhs <= rhs + 1e-12 * L**3
