"""
Ellipse arcs between frames.

Every arc here is pi(M) applied to nu_1 on a window of length 1/2. Sending the
start frame to I and the end frame to P_(13);2 (through the normal form of the
relative frame) leaves only diagonal freedom: B_c = diag(c, c^-2, c) picks the
conic and D_l = diag(1/l, 1, l) slides the parameter along it.
"""
import logging

import numpy as np

from convexa.errors import NearBoundary, NoConvergence, NotStablyConvex, PointOutsideRegion
from convexa.geometry import bruhat
from convexa.geometry import rotations as rot
from convexa.geometry.curves import EllipseArc, FramedCurve, ellipse_curve, eval_ellipse

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
_REFLECT = np.diag([1.0, -1.0, 1.0])


def scale_matrix(c: float) -> np.ndarray:
    """B_c = diag(c, c^-2, c)."""
    return np.diag([c, c ** -2, c])


def slide_matrix(lam: float) -> np.ndarray:
    """D_l = diag(1/l, 1, l); maps nu_1 at tan(pi x) = u to tan(pi x) = l u."""
    return np.diag([1.0 / lam, 1.0, lam])


def shear_matrix(c: float) -> np.ndarray:
    """A(c) = exp(c N) for the nilpotent N with ones above the diagonal; preserves the circle of nu_1."""
    return np.array([[1.0, c, c * c / 2.0], [0.0, 1.0, c], [0.0, 0.0, 1.0]])


def _open_cell_form(relative: np.ndarray) -> bruhat.NormalForm:
    try:
        nf = bruhat.normal_form(relative)
    except NearBoundary as e:
        raise NotStablyConvex(f"relative frame on a cell boundary: {e}") from e
    if nf.perm.name != bruhat.OPEN_CELL:
        raise NotStablyConvex(f"relative frame lies in {nf.perm.name}, not {bruhat.OPEN_CELL}")
    return nf


def _frame_residual(arc: EllipseArc, q_start: np.ndarray, q_end: np.ndarray) -> float:
    _, frames = eval_ellipse(arc, np.array([0.0, 1.0]))
    return float(max(np.max(np.abs(frames[0] - q_start)), np.max(np.abs(frames[1] - q_end))))


def fit_ellipse(z0: np.ndarray, v_t: np.ndarray, t: float, z1: np.ndarray) -> EllipseArc:
    """The unique ellipse arc with lifted frames z0, z1 at 0, 1 passing through v_t at time t."""
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    if not bruhat.is_stably_convex_quat(rot.multiply(rot.conjugate(z0), z1)):
        raise NotStablyConvex("z0^-1 z1 is not stably convex")
    q0, q1 = rot.project(z0), rot.project(z1)
    nf = _open_cell_form(q0.T @ q1)
    normalizer = nf.u0 @ q0.T

    p = normalizer @ np.asarray(v_t, dtype=float)
    p = p / np.linalg.norm(p)
    if np.any(p <= 0):
        raise PointOutsideRegion(f"normalized point {np.round(p, 6)} is not in the positive octant")
    c = (p[1] ** 2 / (2.0 * p[0] * p[2])) ** (1.0 / 6.0)
    on_circle = scale_matrix(c) @ p
    u_star = on_circle[1] / (rot.SQRT2 * on_circle[0])
    lam = np.tan(np.pi * t / 2.0) / u_star
    m = np.linalg.inv(slide_matrix(lam) @ scale_matrix(c) @ normalizer)

    arc = EllipseArc(m, 0.0, 0.5)
    point, _ = eval_ellipse(arc, t)
    target = np.asarray(v_t, dtype=float) / np.linalg.norm(v_t)
    residual = max(_frame_residual(arc, q0, q1), float(np.max(np.abs(point - target))))
    if residual > RESIDUAL_TOL:
        raise NoConvergence(f"ellipse fit residual {residual:.3e}")
    logger.debug(f"fit_ellipse: c = {c:.6f}, lambda = {lam:.6f}, residual {residual:.2e}")
    return EllipseArc(m, 0.0, 0.5, residual)


def osculating_ellipse(q: np.ndarray) -> EllipseArc:
    """
    The arc from frame I to frame Q that osculates the circle of nu_1 at e1.
    With U0 unit upper triangular the curvature at e1 is unchanged, so the arc
    is pi(U0^-1) nu_1 on [0, 1/2].
    """
    q = np.asarray(q, dtype=float)
    nf = _open_cell_form(q)
    arc = EllipseArc(np.linalg.inv(nf.u0), 0.0, 0.5)
    residual = _frame_residual(arc, np.eye(3), q)
    if residual > RESIDUAL_TOL:
        raise NoConvergence(f"osculating ellipse residual {residual:.3e}")
    return EllipseArc(arc.M, arc.a, arc.b, residual)


def osculating_ellipse_end(q: np.ndarray) -> EllipseArc:
    """The arc from frame I to frame Q that osculates Q's copy of the circle of nu_1 at its end."""
    q = np.asarray(q, dtype=float)
    reflected = osculating_ellipse(_REFLECT @ q.T @ _REFLECT)
    m = q @ _REFLECT @ reflected.M @ _REFLECT
    arc = EllipseArc(m, -0.5, 0.5)
    residual = _frame_residual(arc, np.eye(3), q)
    if residual > RESIDUAL_TOL:
        raise NoConvergence(f"end-osculating ellipse residual {residual:.3e}")
    return EllipseArc(m, -0.5, 0.5, residual)


def _translate(arc: EllipseArc, z: np.ndarray) -> EllipseArc:
    return EllipseArc(rot.project(z) @ arc.M, arc.a, arc.b, arc.residual)


def _connect(z_a, z_b, builder, cells: int) -> FramedCurve:
    z_a = rot.normalize(z_a)
    z_b = rot.normalize(z_b)
    if not bruhat.is_stably_convex_quat(rot.multiply(rot.conjugate(z_a), z_b)):
        raise NotStablyConvex("z_a^-1 z_b is not stably convex")
    relative = rot.project(z_a).T @ rot.project(z_b)
    arc = _translate(builder(relative), z_a)
    curve = ellipse_curve(arc, cells, start_lift=z_a)
    end = rot.multiply(curve.base, curve.endpoint_lift)
    if rot.chordal(end, z_b) > 1e-6:
        raise NoConvergence("connecting arc does not end at the requested lift")
    return curve


def convex_connect(z_a: np.ndarray, z_b: np.ndarray, cells: int = 256) -> FramedCurve:
    """A convex arc from lift z_a to lift z_b, osculating nu_1's circle (translated by z_a) at its start."""
    return _connect(z_a, z_b, osculating_ellipse, cells)


def convex_connect_end(z_a: np.ndarray, z_b: np.ndarray, cells: int = 256) -> FramedCurve:
    """As convex_connect, osculating the translated circle at the end instead."""
    return _connect(z_a, z_b, osculating_ellipse_end, cells)
