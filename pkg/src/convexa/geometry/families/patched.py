"""
Patched families: g_s, built from g0 by gluing in arcs of nu_2 near t = 0, 1,
and the disk families h_hat used to count intersections with M_k.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from convexa.errors import ConvexityWindowNotFound, NearBoundary, NotMonotone, NotStablyConvex, WindowTooSmall
from convexa.geometry import bruhat
from convexa.geometry import rotations as rot
from convexa.geometry.curves import (
    DEFAULT_CELLS,
    FramedCurve,
    nu1_lift,
    reparametrize,
    restrict,
    shift_closed,
    splice,
    transform,
)
from convexa.geometry.families.circles import nu, nu_segment
from convexa.geometry.families.ellipses import convex_connect, convex_connect_end, shear_matrix
from convexa.geometry.families.hexarc import NORTH, SOUTH, g0, g0_lift, sphere_point

logger = logging.getLogger(__name__)

_FIRST_WINDOW = 1.0 / 12.0
_WINDOW_HALVINGS = 8
_CAP_RADIUS = np.pi / 4
_OUTER_RADIUS = 7.0 / 8.0


@dataclass(frozen=True)
class PatchWindows:
    eps1: float
    eps2: float


def _patch_points(grid_points: int) -> np.ndarray:
    n_alpha = 4
    n_theta = max(1, grid_points // n_alpha)
    alphas = (np.arange(n_alpha) + 0.5) * np.pi / n_alpha
    thetas = 2 * np.pi * np.arange(n_theta) / n_theta
    a, t = np.meshgrid(alphas, thetas, indexing="ij")
    return sphere_point(t.ravel(), a.ravel())


def _stably_convex(z: np.ndarray) -> bool:
    try:
        return bruhat.is_stably_convex_quat(z)
    except NearBoundary:
        return False


def _patch_ok(points: np.ndarray, eps1: float) -> bool:
    eps2 = eps1 / 8
    lifts = g0_lift(points, np.array([eps1, 1.0 - eps1]))
    start = rot.conjugate(nu1_lift(2 * eps2))
    end = nu1_lift(2 * (1.0 - eps2))
    for near_start, near_end in lifts:
        if not _stably_convex(rot.multiply(start, near_start)):
            return False
        if not _stably_convex(rot.multiply(rot.conjugate(near_end), end)):
            return False
    return True


@lru_cache(maxsize=8)
def patch_windows(grid_points: int = 32, margin: float = 2.0) -> PatchWindows:
    """
    eps1: a window where every g0(p) on a p-grid can be patched to nu_2 by
    osculating ellipses, shrunk by the margin; eps2 = eps1 / 8.
    """
    points = _patch_points(grid_points)
    for m in range(_WINDOW_HALVINGS):
        candidate = _FIRST_WINDOW / 2 ** m
        if _patch_ok(points, candidate) and _patch_ok(points, candidate / margin):
            eps1 = candidate / margin
            logger.info(f"patch windows: eps1 = {eps1:.6f}, eps2 = {eps1 / 8:.6f}")
            return PatchWindows(eps1, eps1 / 8)
    raise WindowTooSmall("no patch window found for g0")


def g_hat(p, windows: PatchWindows, cells: int = DEFAULT_CELLS) -> FramedCurve:
    """g0(p) with its ends on [0, eps1] and [1 - eps1, 1] replaced by nu_2 and two ellipse arcs."""
    eps1, eps2 = windows.eps1, windows.eps2
    p = np.asarray(p, dtype=float)
    inner = g0_lift(p[None, :], np.array([eps1, 1.0 - eps1]))[0]
    pieces = [
        (nu_segment(0.0, 2 * eps2, 16), eps2),
        (convex_connect(nu1_lift(2 * eps2), inner[0]), eps1 - eps2),
        (restrict(g0(p, cells), eps1, 1.0 - eps1), 1.0 - 2 * eps1),
        (convex_connect_end(inner[1], nu1_lift(2 * (1.0 - eps2))), eps1 - eps2),
        (nu_segment(2 * (1.0 - eps2), 2.0, 16), eps2),
    ]
    return splice(pieces)


def shear_parameter(s: float, eps2: float) -> float:
    """c with pi(A(c)) sending nu_2(1 - 2 eps2) to nu_2(1 - s) along the circle."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(rot.SQRT2 * (1.0 / np.tan(4 * np.pi * eps2) - 1.0 / np.tan(2 * np.pi * s)))


def _sheared(s: float, p, windows: PatchWindows, cells: int) -> FramedCurve:
    c = shear_parameter(s, windows.eps2)
    if not np.isfinite(c):
        raise WindowTooSmall(f"shear parameter for s = {s} is not finite")
    shifted = shift_closed(g_hat(p, windows, cells), windows.eps2).with_base(rot.ONE)
    # the part after 1 - 2 eps2 is nu_2 for every p and is replaced by the tail
    head = restrict(shifted, 0.0, 1.0 - 2 * windows.eps2)
    return transform(shear_matrix(c), head)


def increasing_table(x: np.ndarray, y: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """
    The subsequence of the samples (x, y) along which both columns increase
    strictly, keeping the first and the last sample.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or x[-1] - x[0] <= tol or y[-1] - y[0] <= tol:
        raise NotMonotone("table does not increase from its first to its last sample")
    keep = [0]
    for i in range(1, len(x) - 1):
        if (x[keep[-1]] + tol < x[i] < x[-1] - tol) and (y[keep[-1]] + tol < y[i] < y[-1] - tol):
            keep.append(i)
    keep.append(len(x) - 1)
    if len(keep) < len(x):
        logger.debug(f"increasing_table: dropped {len(x) - len(keep)} of {len(x)} samples")
    return x[keep], y[keep]


def _circle_angles(curve: FramedCurve) -> np.ndarray:
    """Angle of the relative lifts along the k_hat circle, exp(angle k_hat)."""
    q = curve.lifts
    return np.unwrap(2 * np.arctan2(q[:, 1:] @ rot.K_HAT_AXIS, q[:, 0])) / 2


@lru_cache(maxsize=32)
def _head_angles(s: float, windows: PatchWindows, cells: int) -> tuple[np.ndarray, np.ndarray]:
    """Angle table of the sheared head at the south pole, as (angle, time)."""
    head = _sheared(s, SOUTH, windows, cells)
    return increasing_table(_circle_angles(head), head.grid)


def _head_time_map(s: float, windows: PatchWindows, cells: int):
    angles, times = _head_angles(s, windows, cells)

    def psi(u):
        u = np.asarray(u, dtype=float)
        return np.interp(u * angles[-1], angles, times)

    return psi


def gs(s: float, p, cells: int = DEFAULT_CELLS, windows: PatchWindows | None = None) -> FramedCurve:
    """
    g_s(p): equal to nu_2 on [1 - s, 1] for every p, with g_s(south) = nu_2
    and g_0 = g0.
    """
    p = np.asarray(p, dtype=float)
    if s == 0:
        return g0(p, cells)
    if not 0.0 < s < 0.5:
        raise WindowTooSmall(f"s = {s} outside [0, 1/2)")
    windows = windows or patch_windows()
    head = reparametrize(_sheared(s, p, windows, cells), _head_time_map(s, windows, cells))
    tail = nu_segment(2 * (1.0 - s), 2.0, max(16, int(cells * s)))
    curve = splice([(head, 1.0 - s), (tail, s)])
    return curve.with_metadata(family="gs", s=float(s), p=[float(x) for x in p])


# -- the disk families -----------------------------------------------------


def cap_map(r, theta) -> np.ndarray:
    """w(r, theta): the disk of radius pi/4 onto the sphere, centre to the south pole, rim to the north."""
    r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
    return np.stack([
        np.cos(theta) * np.sin(4 * r),
        np.sin(theta) * np.sin(4 * r),
        -np.cos(4 * r),
    ], axis=-1)


def _is_convex_safe(z) -> bool:
    try:
        return bruhat.is_convex_quat(z)
    except NearBoundary:
        return False


def find_eps0(k: int, z: np.ndarray, halvings: int = 12) -> float:
    """A window eps0 for which -nu_1(k t)^-1 z is convex on (0, eps0] and the closing arc exists."""
    z = rot.normalize(z)
    sign = (-1.0) ** k
    for m in range(halvings):
        eps0 = 0.2 / k / 2 ** m
        z0 = -nu1_lift(eps0)
        closing = rot.multiply(rot.conjugate(rot.power(z0, k - 1)), sign * z)
        if not _stably_convex(closing):
            continue
        ts = np.linspace(0.0, eps0, 9)[1:]
        if all(_is_convex_safe(-rot.multiply(rot.conjugate(nu1_lift(k * t)), z)) for t in ts):
            logger.debug(f"eps0 = {eps0:.6f} for k = {k}")
            return eps0
    raise ConvexityWindowNotFound(f"no eps0 for k = {k}")


def _loop_blocks(move: int, sigma: float, cells: int) -> FramedCurve:
    """
    A closed curve with lift 1 and 2 + 2 move + 2 sigma loops (in total
    curvature). Rounds of b equal blocks turn nu_2 blocks into nu_4 one at a
    time through g0 along a meridian; the end of a round (b blocks of nu_4)
    is the start of the next (2b blocks of nu_2).
    """
    blocks = 1
    while move >= 2 * blocks - 1:
        blocks *= 2
    m = move - (blocks - 1)
    pieces = [(nu(4, cells), 1.0)] * m
    pieces.append((g0(sphere_point(0.0, sigma * np.pi), cells), 1.0))
    pieces += [(nu(2, cells), 1.0)] * (blocks - m - 1)
    return splice(pieces)


@lru_cache(maxsize=32)
def _rim_angles(s1: float, windows: PatchWindows, cells: int) -> tuple[np.ndarray, np.ndarray]:
    """(time, normalized angle) of the head of g_s1(north), a reparametrization of nu_4."""
    head = restrict(gs(s1, NORTH, cells, windows), 0.0, 1.0 - s1)
    angles = _circle_angles(head)
    return increasing_table(head.grid, angles / angles[-1])


def _annulus_head(move: int, sigma: float, s1: float, cells: int, windows: PatchWindows) -> FramedCurve:
    # nu_4 = nu_2 nu_2; the loops replace the first nu_2 and the head of
    # g_s1(north) ends at nu_4(1 - s1 / 2) = z0
    loops = splice([(_loop_blocks(move, sigma, cells), 1.0), (nu(2, cells), 1.0)])
    times, values = _rim_angles(s1, windows, cells)
    return reparametrize(restrict(loops, 0.0, 1.0 - s1 / 2), lambda u: np.interp(u, times, values))


def _disk_head(point, k: int, s1: float, cells: int, windows: PatchWindows) -> FramedCurve:
    x, y = float(point[0]), float(point[1])
    r = float(np.hypot(x, y))
    if r <= _CAP_RADIUS:
        theta = float(np.arctan2(y, x))
        return restrict(gs(s1, cap_map(r, theta), cells, windows), 0.0, 1.0 - s1)
    moves = 4 * k - 2
    progress = min((r - _CAP_RADIUS) / (_OUTER_RADIUS - _CAP_RADIUS), 1.0) * moves
    move = min(int(np.floor(progress)), moves - 1)
    return _annulus_head(move, progress - move, s1, cells, windows)


def h_hat(k: int, z: np.ndarray, p, cells: int = DEFAULT_CELLS,
          windows: PatchWindows | None = None) -> FramedCurve:
    """
    The family over (D^2)^(k-1): window i is a head ending at the lift z0, so
    the frame at i/k is z0^i; the last window is a convex arc to (-1)^k z.
    """
    z = rot.normalize(z)
    if not _is_convex_safe(-z):
        raise NotStablyConvex("h_hat needs -z convex")
    points = np.atleast_2d(np.asarray(p, dtype=float))
    if points.shape != (k - 1, 2):
        raise ValueError(f"expected {k - 1} disk points, got shape {points.shape}")
    if np.any(np.hypot(points[:, 0], points[:, 1]) > 1.0 + 1e-12):
        raise ValueError("disk points must have norm at most 1")
    windows = windows or patch_windows()
    eps0 = find_eps0(k, z)
    s1 = (1.0 - eps0) / 2
    z0 = -nu1_lift(eps0)

    pieces = [(_disk_head(point, k, s1, cells, windows), 1.0) for point in points]
    tail = convex_connect(rot.power(z0, k - 1), (-1.0) ** k * z)
    pieces.append((tail, 1.0))
    curve = splice(pieces)
    return curve.with_metadata(family="h_hat", k=k, eps0=eps0, p=points.tolist())
