"""
Tests for the quaternion algebra and the covering projection S^3 -> SO(3).
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from convexa.errors import BranchAmbiguous, ProjectionMismatch
from convexa.geometry import rotations as rot

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)
raw_quaternions = arrays(np.float64, 4, elements=finite).filter(lambda q: np.linalg.norm(q) > 1e-3)
imaginary = arrays(np.float64, 3, elements=st.floats(min_value=-3.0, max_value=3.0))


def _same_rotation_class(p, q, atol=1e-9):
    return min(np.linalg.norm(p - q), np.linalg.norm(p + q)) < atol


@given(raw_quaternions, raw_quaternions)
def test_projection_is_a_homomorphism(p, q):
    p, q = rot.normalize(p), rot.normalize(q)
    assert_allclose(rot.project(rot.multiply(p, q)), rot.project(p) @ rot.project(q), atol=1e-10)


@given(raw_quaternions)
def test_projection_is_a_rotation_and_even(q):
    q = rot.normalize(q)
    r = rot.project(q)
    assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
    assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)
    assert_allclose(rot.project(-q), r, atol=1e-15)


def test_half_angle_convention():
    # exp(theta k / 2) rotates by theta about the z-axis
    r = rot.project(rot.exp_im(np.array([0.0, 0.0, np.pi / 4])))
    assert_allclose(r, [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]], atol=1e-15)
    assert_allclose(rot.rot_z(np.pi / 2), r, atol=1e-15)


def test_unit_products():
    assert_allclose(rot.multiply(rot.I, rot.J), rot.K)
    assert_allclose(rot.multiply(rot.J, rot.K), rot.I)
    assert_allclose(rot.multiply(rot.K, rot.I), rot.J)
    assert_allclose(rot.power(rot.I, 2), -rot.ONE, atol=1e-15)
    assert_allclose(rot.product(rot.I, rot.J, rot.K), -rot.ONE, atol=1e-15)


@given(raw_quaternions)
def test_rotation_to_quaternion_recovers_a_preimage(q):
    q = rot.normalize(q)
    recovered = rot.rotation_to_quaternion(rot.project(q))
    assert _same_rotation_class(recovered, q, atol=1e-8)


@given(imaginary)
def test_log_inverts_exp_below_pi(v):
    if np.linalg.norm(v) >= np.pi - 1e-6:
        return
    assert_allclose(rot.log_unit(rot.exp_im(v)), v, atol=1e-9)


def test_exp_of_zero_is_one():
    assert_allclose(rot.exp_im(np.zeros(3)), rot.ONE)
    assert_allclose(rot.log_unit(rot.ONE), np.zeros(3))


@given(raw_quaternions, raw_quaternions)
@settings(max_examples=50)
def test_slerp_endpoints_and_constant_speed(p, q):
    p, q = rot.normalize(p), rot.normalize(q)
    if np.dot(p, q) < -0.999:
        return
    s = np.linspace(0.0, 1.0, 11)
    path = rot.slerp(p, q, s)
    assert_allclose(path[0], p, atol=1e-9)
    assert_allclose(path[-1], q, atol=1e-9)
    steps = rot.angle_between(path[:-1], path[1:])
    assert_allclose(steps, steps[0], atol=1e-9)


def test_gram_schmidt_removes_an_upper_triangular_factor():
    rng = np.random.default_rng(3)
    q = rot.random_rotations(rng, 5)
    upper = np.triu(rng.uniform(0.5, 2.0, (5, 3, 3)))
    assert_allclose(rot.gram_schmidt(q @ upper), q, atol=1e-12)


def test_lift_path_is_continuous_and_returns_to_minus_one():
    theta = np.linspace(0.0, 2 * np.pi, 200)
    frames = np.stack([rot.rot_z(t) for t in theta])
    lifted = rot.lift_path(frames, rot.ONE)
    assert_allclose(lifted[-1], -rot.ONE, atol=1e-12)
    assert np.max(rot.chordal(lifted[1:], lifted[:-1])) < 0.1


def test_lift_path_rejects_a_wrong_start():
    frames = np.stack([rot.rot_z(0.0), rot.rot_z(0.1)])
    with pytest.raises(ProjectionMismatch):
        rot.lift_path(frames, rot.I)


def test_lift_path_rejects_coarse_samples():
    frames = np.stack([rot.rot_z(0.0), rot.rot_z(np.pi / 2), rot.rot_z(np.pi)])
    with pytest.raises(BranchAmbiguous):
        rot.lift_path(frames, rot.ONE)


def test_distance_to_a_circle_of_the_sphere():
    s = np.linspace(-3.0, 3.0, 13)
    on_circle = rot.exp_im(s[:, None] * rot.K_HAT_AXIS)
    assert_allclose(rot.dist_to_circle(on_circle, rot.K_HAT_AXIS), 0.0, atol=1e-7)
    assert rot.dist_to_circle(rot.J, rot.K_HAT_AXIS) == pytest.approx(np.sqrt(2.0))


def test_random_quaternions_are_unit_and_reproducible():
    a = rot.random_unit_quaternions(np.random.default_rng(7), 100)
    b = rot.random_unit_quaternions(np.random.default_rng(7), 100)
    assert a.shape == (100, 4)
    assert_allclose(np.linalg.norm(a, axis=-1), 1.0)
    assert np.array_equal(a, b)
