"""
Quaternion and rotation algebra for the double cover S^3 -> SO(3).

Quaternions are numpy arrays whose last axis holds (w, x, y, z), the
coefficients of 1, i, j, k. Imaginary quaternions are arrays whose last axis
holds (x, y, z). Every function broadcasts over leading axes.
"""
import logging

import numpy as np

from convexa.errors import BranchAmbiguous, ProjectionMismatch

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])

# axes of the standard circle and of its normal direction
K_HAT_AXIS = np.array([1.0, 0.0, 1.0]) / SQRT2
I_HAT_AXIS = np.array([1.0, 0.0, -1.0]) / SQRT2
K_HAT = np.concatenate(([0.0], K_HAT_AXIS))
I_HAT = np.concatenate(([0.0], I_HAT_AXIS))

BRANCH_THRESHOLD = 0.5


def quat(w, x, y, z) -> np.ndarray:
    """Builds a unit quaternion, renormalizing the given components."""
    return normalize(np.array([w, x, y, z], dtype=float))


def normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def multiply(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product p*q, renormalized."""
    return normalize(hamilton(p, q))


def hamilton(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product without renormalization (also valid for imaginary inputs)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    w1, x1, y1, z1 = np.moveaxis(p, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(q, -1, 0)
    w = w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2
    x = w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2
    y = w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2
    z = w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2
    return np.stack([w, x, y, z], axis=-1)


def product(*qs: np.ndarray) -> np.ndarray:
    """Left-to-right product of several quaternions."""
    out = np.asarray(qs[0], dtype=float)
    for q in qs[1:]:
        out = multiply(out, q)
    return out


def power(q: np.ndarray, n: int) -> np.ndarray:
    if n < 0:
        return power(conjugate(q), -n)
    out = np.broadcast_to(ONE, np.shape(q)).copy()
    for _ in range(n):
        out = multiply(out, q)
    return out


def project(q: np.ndarray) -> np.ndarray:
    """
    The covering projection S^3 -> SO(3). Pi(exp(theta k / 2)) is the rotation
    by theta about the z-axis.
    """
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    r = np.empty(q.shape[:-1] + (3, 3))
    r[..., 0, 0] = 1 - 2 * (y * y + z * z)
    r[..., 0, 1] = 2 * (x * y - w * z)
    r[..., 0, 2] = 2 * (x * z + w * y)
    r[..., 1, 0] = 2 * (x * y + w * z)
    r[..., 1, 1] = 1 - 2 * (x * x + z * z)
    r[..., 1, 2] = 2 * (y * z - w * x)
    r[..., 2, 0] = 2 * (x * z - w * y)
    r[..., 2, 1] = 2 * (y * z + w * x)
    r[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return r


def rotation_to_quaternion(r: np.ndarray) -> np.ndarray:
    """
    One of the two preimages of a rotation matrix (Shepperd's method). The sign
    is not continuous; use lift_path for continuous lifts.
    """
    r = np.asarray(r, dtype=float)
    r00, r11, r22 = r[..., 0, 0], r[..., 1, 1], r[..., 2, 2]
    trace = r00 + r11 + r22
    choice = np.argmax(np.stack([trace, r00, r11, r22], axis=-1), axis=-1)

    def root(value):
        return 0.5 * np.sqrt(np.clip(value, 1e-300, None))

    cands = np.empty(r.shape[:-2] + (4, 4))
    w = root(1 + trace)
    cands[..., 0, :] = np.stack([
        w,
        (r[..., 2, 1] - r[..., 1, 2]) / (4 * w),
        (r[..., 0, 2] - r[..., 2, 0]) / (4 * w),
        (r[..., 1, 0] - r[..., 0, 1]) / (4 * w),
    ], axis=-1)
    x = root(1 + r00 - r11 - r22)
    cands[..., 1, :] = np.stack([
        (r[..., 2, 1] - r[..., 1, 2]) / (4 * x),
        x,
        (r[..., 0, 1] + r[..., 1, 0]) / (4 * x),
        (r[..., 0, 2] + r[..., 2, 0]) / (4 * x),
    ], axis=-1)
    y = root(1 - r00 + r11 - r22)
    cands[..., 2, :] = np.stack([
        (r[..., 0, 2] - r[..., 2, 0]) / (4 * y),
        (r[..., 0, 1] + r[..., 1, 0]) / (4 * y),
        y,
        (r[..., 1, 2] + r[..., 2, 1]) / (4 * y),
    ], axis=-1)
    z = root(1 - r00 - r11 + r22)
    cands[..., 3, :] = np.stack([
        (r[..., 1, 0] - r[..., 0, 1]) / (4 * z),
        (r[..., 0, 2] + r[..., 2, 0]) / (4 * z),
        (r[..., 1, 2] + r[..., 2, 1]) / (4 * z),
        z,
    ], axis=-1)
    picked = np.take_along_axis(cands, choice[..., None, None], axis=-2)[..., 0, :]
    return normalize(picked)


def exp_im(v: np.ndarray) -> np.ndarray:
    """exp(v) = cos|v| + sin|v| v/|v| for imaginary v given as (x, y, z)."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1)
    # np.sinc(x) = sin(pi x) / (pi x)
    scale = np.sinc(theta / np.pi)
    out = np.concatenate([np.cos(theta)[..., None], scale[..., None] * v], axis=-1)
    return normalize(out)


def log_unit(q: np.ndarray) -> np.ndarray:
    """Principal logarithm of a unit quaternion, returned as (x, y, z)."""
    q = np.asarray(q, dtype=float)
    vec = q[..., 1:]
    s = np.linalg.norm(vec, axis=-1)
    theta = np.arctan2(s, q[..., 0])
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(s > 1e-300, theta / np.where(s > 1e-300, s, 1.0), 1.0)
    return vec * factor[..., None]


def angle_between(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Geodesic distance on S^3 (half the rotation angle of p^-1 q)."""
    r = hamilton(conjugate(p), q)
    return np.arctan2(np.linalg.norm(r[..., 1:], axis=-1), r[..., 0])


def chordal(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(p, dtype=float) - np.asarray(q, dtype=float), axis=-1)


def slerp(q0: np.ndarray, q1: np.ndarray, s) -> np.ndarray:
    """Constant-speed geodesic from q0 (s=0) to q1 (s=1)."""
    s = np.asarray(s, dtype=float)
    omega = log_unit(hamilton(conjugate(q0), q1))
    return multiply(q0, exp_im(s[..., None] * omega))


def gram_schmidt(a: np.ndarray) -> np.ndarray:
    """
    Orthogonal factor of the QR decomposition with positive diagonal; this is
    the projective action pi(A) on frames.
    """
    a = np.asarray(a, dtype=float)
    q, r = np.linalg.qr(a)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs = np.where(signs == 0, 1.0, signs)
    return q * signs[..., None, :]


def lift_path(frames: np.ndarray, q0: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """
    Continuous lift of a sampled path in SO(3) starting at q0. Consecutive lifts
    take the branch with the smaller chordal distance.
    """
    frames = np.asarray(frames, dtype=float)
    q0 = normalize(q0)
    if np.max(np.abs(project(q0) - frames[0])) > tol:
        raise ProjectionMismatch("initial quaternion does not project to the first frame")

    raw = rotation_to_quaternion(frames)
    raw[0] = q0
    dots = np.sum(raw[1:] * raw[:-1], axis=-1)
    flips = np.where(dots < 0, -1.0, 1.0)
    signs = np.concatenate(([1.0], np.cumprod(flips)))
    lifted = raw * signs[:, None]

    if len(lifted) > 1:
        jumps = chordal(lifted[1:], lifted[:-1])
        worst = int(np.argmax(jumps))
        if jumps[worst] > BRANCH_THRESHOLD:
            raise BranchAmbiguous(
                f"frames {worst} and {worst + 1} are {jumps[worst]:.3f} apart in S^3"
            )
    return lifted


def dist_to_circle(q: np.ndarray, axis: np.ndarray) -> np.ndarray:
    """Chordal distance from q to the circle {exp(s a)} through 1 and a."""
    q = np.asarray(q, dtype=float)
    axis = np.asarray(axis, dtype=float)
    along = np.sum(q[..., 1:] * axis, axis=-1)
    r = np.sqrt(q[..., 0] ** 2 + along ** 2)
    return np.sqrt(np.clip(2.0 - 2.0 * r, 0.0, None))


def random_unit_quaternions(rng: np.random.Generator, size) -> np.ndarray:
    return normalize(rng.standard_normal(tuple(np.atleast_1d(size)) + (4,)))


def random_rotations(rng: np.random.Generator, size) -> np.ndarray:
    return project(random_unit_quaternions(rng, size))


def rot_y(phi: float) -> np.ndarray:
    return project(exp_im(np.array([0.0, phi / 2, 0.0])))


def rot_z(theta: float) -> np.ndarray:
    return project(exp_im(np.array([0.0, 0.0, theta / 2])))


H = exp_im(np.array([0.0, np.pi / 8, 0.0]))
