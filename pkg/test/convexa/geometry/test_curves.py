"""
Tests for framed curves: integration of log coordinates, total curvature and
the operations that build new curves from old ones.
"""
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from convexa.errors import Degenerate, NotMonotone
from convexa.geometry import rotations as rot
from convexa.geometry.curves import (
    EllipseArc,
    FramedCurve,
    LogCoords,
    concat,
    eval_ellipse,
    extract_coords,
    geodesic_curvature,
    integrate_frame,
    integrate_speeds,
    refine,
    reparametrize,
    restrict,
    shift_closed,
    splice,
    tangent_variation,
    total_curvature,
    transform,
    unit_determinant,
)
from convexa.geometry.families import circle, equator, nu, scale_matrix

SQRT2_PI = np.sqrt(2.0) * np.pi


def test_constant_speeds_give_the_standard_circle():
    curve = integrate_frame(LogCoords.constant(SQRT2_PI, SQRT2_PI, 256))
    assert_allclose(curve.endpoint_lift, -rot.ONE, atol=1e-10)
    assert curve.is_locally_convex


def test_double_circle_closes_with_lift_one():
    curve = integrate_frame(LogCoords.constant(2 * SQRT2_PI, 2 * SQRT2_PI, 256))
    assert_allclose(curve.endpoint_lift, rot.ONE, atol=1e-10)


def test_equator_in_the_immersion_chart():
    coords = LogCoords.constant(2 * np.pi, 0.0, 128)
    assert coords.chart == "I"
    curve = integrate_frame(coords)
    assert_allclose(curve.endpoint_lift, -rot.ONE, atol=1e-10)
    assert not curve.is_locally_convex
    assert total_curvature(curve) == pytest.approx(2 * np.pi, abs=1e-9)


def test_integrate_speeds_converges_for_smooth_speeds():
    curve = integrate_speeds(lambda t: np.full_like(t, SQRT2_PI), lambda t: np.full_like(t, SQRT2_PI), cells=64)
    assert_allclose(curve.endpoint_lift, -rot.ONE, atol=1e-9)


@pytest.mark.parametrize("s, v", [(1.0, SQRT2_PI), (2.0, 2 * SQRT2_PI)])
def test_extract_coords_round_trip(s, v):
    coords = extract_coords(nu(s, 128))
    speed, speed_hat = coords.speeds()
    assert coords.chart == "L"
    assert_allclose(speed, v, rtol=1e-9)
    assert_allclose(speed_hat, v, rtol=1e-9)
    again = integrate_frame(coords)
    assert_allclose(again.endpoint_lift, nu(s, 128).endpoint_lift, atol=1e-9)


def test_total_curvature_of_standard_curves():
    assert total_curvature(nu(2)) == pytest.approx(4 * np.pi, abs=1e-9)
    assert total_curvature(equator()) == pytest.approx(2 * np.pi, abs=1e-9)
    assert total_curvature(circle(np.eye(3), np.pi / 6)) == pytest.approx(2 * np.pi, abs=1e-8)


def test_curvature_densities_of_a_circle():
    curve = circle(np.eye(3), np.pi / 6, 64)
    assert_allclose(geodesic_curvature(curve), np.sqrt(3.0), rtol=1e-12)
    assert_allclose(tangent_variation(curve), 2 * np.pi, rtol=1e-12)


def test_transform_by_identity_keeps_the_curve():
    curve = nu(1, 256)
    out = transform(np.eye(3), curve)
    assert_allclose(out.frame_at(curve.grid), curve.frames(), atol=1e-9)
    assert_allclose(out.endpoint_lift, curve.endpoint_lift, atol=1e-9)


def test_transform_by_a_rotation_rotates_frames():
    a = rot.random_rotations(np.random.default_rng(11), 1)[0]
    curve = nu(1, 256)
    out = transform(a, curve)
    assert_allclose(out.frame_at(curve.grid), a @ curve.frames(), atol=1e-9)


def test_transform_by_a_diagonal_scale_stays_locally_convex():
    curve = nu(1, 256)
    out = transform(scale_matrix(2.0), curve)
    assert out.is_locally_convex
    assert_allclose(out.frame_at(1.0), np.eye(3), atol=1e-8)


def test_unit_determinant_rejects_singular_matrices():
    assert np.linalg.det(unit_determinant(np.diag([2.0, 3.0, 4.0]))) == pytest.approx(1.0)
    with pytest.raises(Degenerate):
        unit_determinant(np.diag([1.0, 0.0, 1.0]))


def test_concat_of_two_circles_is_the_double_circle():
    joined = concat(nu(1, 128), nu(1, 128))
    assert_allclose(joined.endpoint_lift, rot.ONE, atol=1e-10)
    t = np.linspace(0.0, 1.0, 33)
    assert_allclose(joined.lift_at(t), nu(2, 256).lift_at(t), atol=1e-9)


def test_splice_respects_durations():
    joined = splice([(nu(1, 64), 0.25), (nu(1, 64), 0.75)])
    assert_allclose(joined.lift_at(0.25), -rot.ONE, atol=1e-10)
    assert_allclose(joined.endpoint_lift, rot.ONE, atol=1e-10)
    with pytest.raises(ValueError):
        splice([(nu(1, 64), 0.0)])


def test_restrict_rescales_the_window():
    curve = nu(2, 256)
    arc = restrict(curve, 0.25, 0.75)
    s = np.linspace(0.0, 1.0, 9)
    assert_allclose(arc.point_at(s), curve.point_at(0.25 + 0.5 * s), atol=1e-9)
    with pytest.raises(ValueError):
        restrict(curve, 0.5, 0.5)


def test_shift_closed_starts_later():
    curve = nu(2, 256)
    shifted = shift_closed(curve, 0.25)
    t = np.linspace(0.0, 0.75, 7)
    assert_allclose(shifted.point_at(t), curve.point_at(t + 0.25), atol=1e-9)
    assert shift_closed(curve, 0.0) is curve


def test_reparametrize_identity_and_square():
    curve = nu(2, 256)
    same = reparametrize(curve, lambda t: t)
    assert_allclose(same.lift_at(curve.grid), curve.lifts, atol=1e-12)
    squared = reparametrize(curve, lambda t: t * t)
    assert total_curvature(squared) == pytest.approx(4 * np.pi, abs=1e-6)
    assert_allclose(squared.endpoint_lift, curve.endpoint_lift, atol=1e-12)


def test_reparametrize_piecewise_affine_keeps_the_endpoint():
    curve = circle(np.eye(3), np.pi / 5, 128)
    out = reparametrize(curve, lambda t: np.interp(t, [0.0, 0.3, 1.0], [0.0, 0.6, 1.0]))
    assert_allclose(out.endpoint_lift, curve.endpoint_lift, atol=1e-12)


def test_reparametrize_rejects_decreasing_maps():
    with pytest.raises(NotMonotone):
        reparametrize(nu(1, 32), lambda t: 1.0 - t)


interior = st.floats(min_value=0.01, max_value=0.99)


@given(interior, interior)
@settings(max_examples=30, deadline=None)
def test_restrict_matches_the_window(a, b):
    assume(b - a > 1e-3)
    curve = nu(2, 128)
    arc = restrict(curve, a, b)
    s = np.linspace(0.0, 1.0, 9)
    assert_allclose(arc.absolute_lift_at(s), curve.absolute_lift_at(a + (b - a) * s), atol=1e-9)


@given(interior, interior)
@settings(max_examples=30, deadline=None)
def test_reparametrize_keeps_curvature_and_endpoint(knot, value):
    curve = nu(2, 128)
    out = reparametrize(curve, lambda t: np.interp(t, [0.0, knot, 1.0], [0.0, value, 1.0]))
    assert total_curvature(out) == pytest.approx(total_curvature(curve), abs=1e-9)
    assert_allclose(out.endpoint_lift, curve.endpoint_lift, atol=1e-12)
    assert out.is_locally_convex


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), max_size=6))
@settings(max_examples=30, deadline=None)
def test_refine_adds_samples_without_moving_the_curve(times):
    curve = circle(np.eye(3), np.pi / 5, 64)
    finer = refine(curve, times)
    assert set(curve.grid) <= set(finer.grid)
    t = np.linspace(0.0, 1.0, 41)
    assert_allclose(finer.absolute_lift_at(t), curve.absolute_lift_at(t), atol=1e-10)


def test_eval_ellipse_of_the_standard_circle():
    arc = EllipseArc(np.eye(3), 0.0, 1.0)
    point, frame = eval_ellipse(arc, 0.0)
    assert_allclose(point, [1.0, 0.0, 0.0], atol=1e-15)
    assert_allclose(frame, np.eye(3), atol=1e-15)
    _, frame = eval_ellipse(arc, 1.0)
    assert_allclose(frame, np.eye(3), atol=1e-12)
    point, _ = eval_ellipse(EllipseArc(scale_matrix(2.0)), 0.0)
    assert_allclose(point, [1.0, 0.0, 0.0], atol=1e-15)


def test_ellipse_arc_validation():
    with pytest.raises(Degenerate):
        EllipseArc(2.0 * np.eye(3))
    with pytest.raises(ValueError):
        EllipseArc(np.eye(3), 0.0, 0.0)


def test_framed_curve_validation():
    grid = np.linspace(0.0, 1.0, 3)
    ones = np.ones(3)
    with pytest.raises(ValueError):
        FramedCurve(grid, np.tile(rot.I, (3, 1)), ones, ones)
    with pytest.raises(ValueError):
        FramedCurve(np.array([0.0, 0.7, 0.5]), np.tile(rot.ONE, (3, 1)), ones, ones)
    with pytest.raises(ValueError):
        LogCoords(grid, np.array([0.0, np.inf]), np.zeros(2))


def test_from_lifts_rebases_absolute_samples():
    curve = nu(1, 64)
    base = rot.quat(1.0, 2.0, -1.0, 0.5)
    moved = FramedCurve.from_lifts(curve.grid, rot.multiply(base, curve.lifts))
    assert_allclose(moved.lifts, curve.lifts, atol=1e-12)
    assert_allclose(moved.base, base, atol=1e-12)
    assert_allclose(moved.v, curve.v, rtol=1e-9)
    assert_allclose(moved.v_hat, curve.v_hat, rtol=1e-9)
