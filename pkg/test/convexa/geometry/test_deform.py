"""
Tests for the curve surgeries: adding loops, spreading loops and grafting.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from convexa.errors import NoConvergence, NotGraftable, WindowOverflow
from convexa.geometry import deform
from convexa.geometry import rotations as rot
from convexa.geometry.curves import integrate_speeds, nu1_lift, refine, total_curvature, transform
from convexa.geometry.deform import (
    GraftSpec,
    LoopSpec,
    add_loops,
    find_graft_window,
    graft,
    graft_matrix,
    graft_normalized,
    insert_loops_lift,
    middle_map,
    spread_loops,
    spread_loops_search,
)
from convexa.geometry.families import g0, nu, sphere_point


@pytest.fixture(scope="module")
def equator_curve():
    return g0(sphere_point(0.3, np.pi / 2), 256)


@pytest.fixture(scope="module")
def graft_spec(equator_curve):
    for t0 in (0.05, 0.1, 0.15, 0.2, 0.3):
        try:
            window = find_graft_window(equator_curve, t0)
        except NotGraftable:
            continue
        return GraftSpec(window.t0, window.t1, 1.0, window.ell, (window.t1 - window.t0) / 16)
    pytest.fail("no graft window on the equator curve")


def _immersed(cells=256):
    return integrate_speeds(
        lambda t: np.full_like(t, 2 * np.pi),
        lambda t: 2 * np.pi * (0.3 + np.cos(4 * np.pi * t)),
        cells,
    )


# -- adding loops ----------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_add_loops_flips_the_lift_and_adds_curvature(n):
    curve = nu(2, 256)
    looped = add_loops(curve, LoopSpec(0.25, n))
    assert_allclose(looped.endpoint_lift, (-1.0) ** n * curve.endpoint_lift, atol=1e-9)
    assert total_curvature(looped) == pytest.approx(total_curvature(curve) + 2 * np.pi * n, abs=1e-6)
    assert looped.is_locally_convex
    assert looped.metadata["loops"] == [[0.25, n]]


@pytest.mark.parametrize("t0", [0.0, 1.0])
def test_add_loops_at_the_ends(t0):
    curve = nu(2, 256)
    looped = add_loops(curve, LoopSpec(t0, 1))
    assert_allclose(looped.endpoint_lift, -curve.endpoint_lift, atol=1e-9)
    assert total_curvature(looped) == pytest.approx(6 * np.pi, abs=1e-6)


def test_add_loops_outside_the_window_keeps_the_curve():
    curve = nu(2, 256)
    looped = add_loops(curve, LoopSpec(0.5, 1))
    t = np.linspace(0.0, 0.2, 5)
    assert_allclose(looped.lift_at(t), curve.lift_at(t), atol=1e-12)


def test_add_zero_loops_returns_the_curve():
    curve = nu(2, 64)
    assert add_loops(curve, LoopSpec(0.5, 0)) is curve
    with pytest.raises(ValueError):
        add_loops(curve, LoopSpec(0.5, -1))


def test_loop_windows():
    assert LoopSpec(0.4, 1).window() == pytest.approx(0.125)
    assert LoopSpec(0.1, 1).interval() == pytest.approx((0.0, 0.2))
    with pytest.raises(WindowOverflow):
        LoopSpec(0.05, 1, eps=0.1).window()
    with pytest.raises(WindowOverflow):
        LoopSpec(0.5, 1, eps=0.0).window()


def test_insert_loops_on_a_lift_function():
    lifted = insert_loops_lift(lambda t: nu1_lift(2 * t), LoopSpec(0.5, 1))
    values = lifted(np.array([0.0, 0.5, 1.0]))
    assert values.shape == (3, 4)
    assert_allclose(values[0], rot.ONE, atol=1e-12)
    assert_allclose(values[2], -rot.ONE, atol=1e-12)


# -- spreading loops -------------------------------------------------------------


def test_spread_loops_makes_an_immersed_curve_locally_convex():
    curve = _immersed()
    assert not curve.is_locally_convex
    n, spread = spread_loops_search(curve, 2, 256)
    assert n & (n - 1) == 0
    assert spread.is_locally_convex
    assert spread.metadata["spread"] == n


def test_spread_loops_keeps_the_endpoints():
    curve = _immersed()
    _, spread = spread_loops_search(curve, 2, 256)
    assert rot.chordal(spread.base, curve.absolute_lift_at(0.0)) < 1e-9
    end = rot.multiply(spread.base, spread.endpoint_lift)
    assert rot.chordal(end, curve.absolute_lift_at(1.0)) < 1e-6


def test_spread_loops_needs_a_positive_count():
    with pytest.raises(ValueError):
        spread_loops(nu(2, 64), 0)


# -- grafting ---------------------------------------------------------------------


def test_graft_window_is_in_a_graftable_cell(graft_spec):
    assert graft_spec.ell in (1, 4, 7)
    assert 0.0 < graft_spec.t0 < graft_spec.t1 < 1.0


def test_graft_changes_only_the_window(equator_curve, graft_spec):
    grafted = graft(equator_curve, graft_spec)
    grid = equator_curve.grid
    outside = grid[(grid < graft_spec.t0) | (grid > graft_spec.t1)]
    change = rot.chordal(grafted.absolute_lift_at(outside), equator_curve.absolute_lift_at(outside))
    assert np.max(change) < 1e-9
    assert grafted.is_locally_convex
    assert grafted.metadata["graft"][3] == graft_spec.ell


def test_graft_accepts_the_window_off_the_grid(equator_curve, graft_spec):
    # find_graft_window places t1 between samples
    assert graft_spec.t1 not in equator_curve.grid
    spec = GraftSpec(graft_spec.t0, graft_spec.t1, 1.0, graft_spec.ell)
    grafted = graft(equator_curve, spec)
    assert grafted.is_locally_convex
    assert total_curvature(grafted) > total_curvature(equator_curve) + 2 * np.pi
    assert_allclose(grafted.absolute_lift_at(spec.t1), equator_curve.absolute_lift_at(spec.t1), atol=1e-6)


def test_graft_raises_when_the_window_does_not_close(monkeypatch, equator_curve, graft_spec):
    def twisted(curve, t0, t1, s, eps=None):
        return curve.with_base(rot.multiply(curve.base, rot.exp_im(np.array([0.0, 0.0, 0.1]))))

    monkeypatch.setattr(deform, "graft_normalized", twisted)
    with pytest.raises(NoConvergence):
        graft(equator_curve, graft_spec)


def test_graft_with_s_zero_is_the_identity(equator_curve, graft_spec):
    spec = GraftSpec(graft_spec.t0, graft_spec.t1, 0.0, graft_spec.ell)
    assert graft(equator_curve, spec) is equator_curve


def test_normalized_graft_adds_two_circles(equator_curve, graft_spec):
    spec = graft_spec
    curve = refine(equator_curve, [spec.t0, spec.t1])
    normalized = transform(graft_matrix(curve, spec.t0, spec.t1, spec.ell), curve)
    grafted = graft_normalized(normalized, spec.t0, spec.t1, 1.0, spec.eps)
    assert total_curvature(grafted) - total_curvature(normalized) == pytest.approx(4 * np.pi, abs=1e-5)


def test_middle_map_is_conjugate_to_a_rotation(equator_curve, graft_spec):
    full = middle_map(equator_curve, graft_spec)
    assert_allclose(full, np.eye(3), atol=1e-8)
    half = middle_map(equator_curve, GraftSpec(graft_spec.t0, graft_spec.t1, 0.5, graft_spec.ell))
    assert np.trace(half) == pytest.approx(-1.0, abs=1e-8)


def test_graft_spec_windows():
    with pytest.raises(WindowOverflow):
        GraftSpec(0.3, 0.2, 1.0).window()
    with pytest.raises(WindowOverflow):
        GraftSpec(0.1, 0.2, 2.0, eps=0.1).window()
    assert GraftSpec(0.1, 0.5, 1.0).window() == pytest.approx(0.05)


def test_graft_needs_normalized_frames():
    with pytest.raises(NotGraftable):
        graft_normalized(nu(2, 256), 0.1, 0.3, 1.0)


def test_no_graft_window_on_the_circle():
    with pytest.raises(NotGraftable):
        find_graft_window(nu(1, 256), 0.0)
