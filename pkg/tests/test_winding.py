import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isomoment.winding import (HypothesisError, OpenArc, WindingError, circle_arc, curvature_integral,
                               curvature_winding_identity, endpoint_winding, geometric_inequality_check, lower_belt,
                               parametric_arc, perturbed_path, segment, turning_angle, winding_number)

from conftest import radial_func


def cubic(u):
    return (np.stack((u, u**3), -1), np.stack((np.ones_like(u), 3 * u**2), -1), np.stack((0 * u, 6 * u), -1))


def random_star_arc(seed, n=2049):
    """A sub-arc of a random star-shaped Fourier curve, spanning less than a full turn."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    a, b = rng.normal(size=k), rng.normal(size=k)
    scale = 0.3 / (np.abs(a).sum() + np.abs(b).sum())
    u0 = rng.uniform(0, 2 * math.pi)
    span = rng.uniform(0.5, 5.5)
    return parametric_arc(radial_func(1.0, a * scale, b * scale), u0, u0 + span, n)


def test_circle_about_center():
    arc = circle_arc([0.0, 0.0], 1.0, 0.0, 1.5 * math.pi)
    assert abs(winding_number(arc, [0.0, 0.0]).value - 1.5 * math.pi) <= 1e-12


def test_full_circle_winds_once():
    arc = circle_arc([0.3, -0.2], 2.0, 0.0, 2 * math.pi - 1e-9)
    assert abs(winding_number(arc, [0.3, -0.2]).value - 2 * math.pi) <= 1e-8


def test_segment_about_off_line_point():
    # seen from (0, -1) the segment from (-1, 0) to (1, 0) sweeps pi/2 clockwise
    assert abs(winding_number(segment([-1, 0], [1, 0]), [0.0, -1.0]).value + 0.5 * math.pi) <= 1e-12


def test_far_point_sees_almost_nothing():
    arc = circle_arc([0.0, 0.0], 1.0, 0.0, math.pi)
    assert abs(winding_number(arc, [1e6, 0.0]).value) <= 1e-5


def test_point_on_arc_raises():
    arc = segment([0, 0], [1, 0])
    with pytest.raises(WindingError):
        winding_number(arc, arc.points[100])


def test_resampling_near_the_arc():
    # a base point just off a coarse arc forces refinement before the increments are small
    arc = segment([-1, 0], [1, 0], n=17)
    w = winding_number(arc, [1e-3 * 0.5, 1e-2])
    assert abs(w.value - (math.atan2(-1e-2, 1 - 5e-4) - math.atan2(-1e-2, -1 - 5e-4))) <= 1e-12


def test_too_close_without_path_raises():
    pts = np.column_stack((np.linspace(-1, 1, 9), np.zeros(9)))
    with pytest.raises(WindingError):
        winding_number(OpenArc.from_points(pts), [0.01, 1e-4])


def test_endpoint_winding_of_circle_arc():
    # seen from the endpoint of a circular arc, the arc subtends half its central angle
    for theta in (0.5, math.pi, 4.0):
        arc = circle_arc([0.0, 0.0], 1.0, 0.0, theta)
        assert abs(endpoint_winding(arc, "end") - theta / 2) <= 1e-7
        assert abs(endpoint_winding(arc, "start") - theta / 2) <= 1e-7


def test_endpoint_winding_of_segment_is_zero():
    arc = segment([0, 0], [2, 1])
    assert abs(endpoint_winding(arc, "end")) <= 1e-12
    assert abs(endpoint_winding(arc, "start")) <= 1e-12


def test_endpoint_winding_independent_of_extension():
    arc = parametric_arc(cubic, -1.0, 0.8)
    for which in ("start", "end"):
        a = endpoint_winding(arc, which, extension="tangent")
        b = endpoint_winding(arc, which, extension="circle")
        assert abs(a - b) <= 1e-6


def test_curvature_integral_against_analytic_cubic():
    # the tangent angle of (u, u^3) is atan(3 u^2)
    arc = parametric_arc(cubic, -1.0, 0.8)
    oracle = math.atan(3 * 0.8**2) - math.atan(3.0)
    assert abs(curvature_integral(arc) - oracle) <= 1e-6
    assert abs(turning_angle(arc) - oracle) <= 1e-12


def test_identity_on_circle_arc():
    lhs, rhs = curvature_winding_identity(circle_arc([0.0, 0.0], 1.0, 0.0, math.pi))
    assert abs(lhs - math.pi) <= 1e-10
    assert abs(lhs - rhs) <= 1e-5


@pytest.mark.parametrize("seed", range(50))
def test_identity_on_random_arcs(seed):
    arc = random_star_arc(seed)
    assert arc.simple
    lhs, rhs = curvature_winding_identity(arc)
    assert abs(lhs - rhs) <= 1e-5


def test_identity_rejects_non_simple_arc():
    loop = circle_arc([0.0, 0.0], 1.0, 0.0, 2.5 * math.pi)
    with pytest.raises(WindingError):
        curvature_winding_identity(loop)


@pytest.mark.parametrize("seed", range(10))
def test_additivity(seed):
    rng = np.random.default_rng(seed)
    arc = random_star_arc(seed)
    first, second = arc.split(rng.uniform(0.1, 0.9) * arc.length)
    x0 = rng.uniform(-0.2, 0.2, size=2)
    total = winding_number(arc, x0).value
    parts = winding_number(first, x0).value + winding_number(second, x0).value
    assert abs(total - parts) <= 1e-9


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), angle=st.floats(-math.pi, math.pi), dx=st.floats(-5, 5), dy=st.floats(-5, 5))
def test_rigid_motion_invariance(seed, angle, dx, dy):
    arc = random_star_arc(seed, n=513)
    x0 = np.array([0.05, -0.03])
    c, s = math.cos(angle), math.sin(angle)
    moved = arc.transformed(angle, [dx, dy])
    y0 = np.array([[c, -s], [s, c]]) @ x0 + [dx, dy]
    assert abs(winding_number(arc, x0).value - winding_number(moved, y0).value) <= 1e-9


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_reversal_antisymmetry(seed):
    arc = random_star_arc(seed, n=513)
    x0 = np.array([0.02, 0.04])
    assert abs(winding_number(arc, x0).value + winding_number(arc.reversed(), x0).value) <= 1e-12


def test_tangent_segment_is_equality_case():
    c1, c2, t = [0.0, 0.0], [3.0, 0.0], 0.5
    rep = geometric_inequality_check(segment([0.0, -t], [3.0, -t]), c1, c2, t)
    assert abs(rep.margin) <= 1e-9 and rep.passed


def test_lower_belt_is_equality_case():
    c1, c2, t = [0.0, 0.0], [3.0, 0.0], 0.5
    arc = OpenArc.from_path(lower_belt(c1, c2, t))
    rep = geometric_inequality_check(arc, c1, c2, t)
    assert abs(rep.length - (3.0 + math.pi * t)) <= 1e-12
    assert abs(rep.curvature_term - math.pi * t) <= 1e-9
    assert abs(rep.margin) <= 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_belt_perturbations_only_increase_margin(seed):
    rng = np.random.default_rng(seed)
    c1, c2, t = [0.0, 0.0], [3.0, 0.0], 0.5
    arc = OpenArc.from_path(perturbed_path(lower_belt(c1, c2, t), rng.uniform(-0.4, 0.4, size=3)))
    assert arc.simple
    rep = geometric_inequality_check(arc, c1, c2, t)
    # the bump keeps the endpoint frames, so the curvature term is unchanged
    assert abs(rep.curvature_term - math.pi * t) <= 1e-9
    assert rep.margin >= -1e-6


def test_misaligned_tangent_rejected():
    c1, c2, t = [0.0, 0.0], [3.0, 0.0], 0.5
    with pytest.raises(HypothesisError):
        geometric_inequality_check(segment([0.0, -t], [3.0, -t + 0.2]), c1, c2, t)
    # the right points, traversed clockwise about the circles
    with pytest.raises(HypothesisError):
        geometric_inequality_check(segment([3.0, -t], [0.0, -t]), c2, c1, t)


def test_endpoint_off_circle_rejected():
    with pytest.raises(HypothesisError):
        geometric_inequality_check(segment([0.0, -0.6], [3.0, -0.6]), [0.0, 0.0], [3.0, 0.0], 0.5)
