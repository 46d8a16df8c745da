"""
Curve surgeries: adding loops, spreading loops and grafting.

All three work on lifted frames. The curve away from the surgery window keeps
its original samples; inside the window the new pieces are sampled densely
enough for the lift to stay continuous.
"""
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from convexa.errors import (
    BridgeFailed,
    ConvexaError,
    NearBoundary,
    NoConvergence,
    NotGraftable,
    NotStablyConvex,
    WindowOverflow,
    WrongCell,
)
from convexa.geometry import bruhat
from convexa.geometry import rotations as rot
from convexa.geometry.convexity import StepKind, next_step
from convexa.geometry.curves import FramedCurve, ellipse_curve, nu1_lift, refine, restrict, splice, transform
from convexa.geometry.families.circles import nu_segment
from convexa.geometry.families.ellipses import fit_ellipse

logger = logging.getLogger(__name__)

LOOP_SAMPLES = 32
BRIDGE_CELLS = 64
# fraction of each loop window covered by the loop in spread_loops
LOOP_SHARE = 7.0 / 8.0
CLOSURE_TOL = 1e-6
_Z_AXIS = np.array([0.0, 0.0, 1.0])


# -- adding loops ------------------------------------------------------------


@dataclass(frozen=True)
class LoopSpec:
    t0: float
    n: int
    eps: float | None = None

    def window(self) -> float:
        """The insertion half-width, defaulting to the widest window that fits."""
        if self.eps is not None:
            eps = self.eps
        elif self.t0 <= 0.0 or self.t0 >= 1.0:
            eps = 1.0 / (8 * max(self.n, 1))
        else:
            eps = min(1.0 / (8 * max(self.n, 1)), self.t0 / 2, (1.0 - self.t0) / 2)
        if eps <= 0:
            raise WindowOverflow("loop window must be positive")
        if self.t0 <= 0.0 or self.t0 >= 1.0:
            fits = 2 * eps <= 1.0
        else:
            fits = self.t0 - 2 * eps >= -1e-15 and self.t0 + 2 * eps <= 1.0 + 1e-15
        if not fits:
            raise WindowOverflow(f"window of half-width {eps} does not fit around t0 = {self.t0}")
        return eps

    def interval(self) -> tuple[float, float]:
        eps = self.window()
        return max(0.0, self.t0 - 2 * eps), min(1.0, self.t0 + 2 * eps)


def _loop_source(t: np.ndarray, spec: LoopSpec, eps: float):
    """Per time: (source time into the old curve, loop parameter or nan, sign)."""
    t0, n = spec.t0, spec.n
    src = t.copy()
    loop = np.full_like(t, np.nan)
    sign = np.ones_like(t)
    flip = (-1.0) ** n
    if t0 <= 0.0:
        in_loop = t <= eps
        squeezed = (t > eps) & (t <= 2 * eps)
        loop[in_loop] = t[in_loop] / eps
        src[squeezed] = 2 * t[squeezed] - 2 * eps
        sign[t > eps] = flip
    elif t0 >= 1.0:
        squeezed = (t >= 1 - 2 * eps) & (t < 1 - eps)
        in_loop = t >= 1 - eps
        src[squeezed] = 2 * t[squeezed] - 1 + 2 * eps
        loop[in_loop] = (t[in_loop] - 1 + eps) / eps
        src[in_loop] = 1.0
    else:
        before = (t >= t0 - 2 * eps) & (t < t0 - eps)
        in_loop = (t >= t0 - eps) & (t <= t0 + eps)
        after = (t > t0 + eps) & (t <= t0 + 2 * eps)
        src[before] = 2 * t[before] - t0 + 2 * eps
        loop[in_loop] = (t[in_loop] - t0 + eps) / (2 * eps)
        src[in_loop] = t0
        src[after] = 2 * t[after] - t0 - 2 * eps
        sign[t > t0 + eps] = flip
    return np.clip(src, 0.0, 1.0), loop, sign


def insert_loops_lift(lift_fn: Callable, spec: LoopSpec) -> Callable:
    """
    Loop insertion on a vectorized lift function t (n,) -> (..., n, 4), so
    that whole families can be evaluated at once.
    """
    if spec.n == 0:
        return lift_fn
    eps = spec.window()
    anchor_time = np.array([min(max(spec.t0, 0.0), 1.0)])

    def lifted(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        src, loop, sign = _loop_source(t, spec, eps)
        values = lift_fn(src) * sign[:, None]
        in_loop = ~np.isnan(loop)
        if np.any(in_loop):
            anchor = lift_fn(anchor_time)[..., 0, :]
            spin = nu1_lift(spec.n * loop[in_loop])
            values[..., in_loop, :] = rot.multiply(anchor[..., None, :], spin)
        return values

    return lifted


def _loop_times(curve: FramedCurve, spec: LoopSpec, eps: float) -> np.ndarray:
    t0, n = spec.t0, spec.n
    grid = curve.grid
    samples = max(LOOP_SAMPLES * n, LOOP_SAMPLES)
    if t0 <= 0.0:
        parts = [
            np.linspace(0.0, eps, samples + 1),
            (grid[grid <= 2 * eps] + 2 * eps) / 2,
            grid[grid > 2 * eps],
        ]
    elif t0 >= 1.0:
        parts = [
            grid[grid < 1 - 2 * eps],
            (grid[grid >= 1 - 2 * eps] + 1 - 2 * eps) / 2,
            np.linspace(1 - eps, 1.0, samples + 1),
        ]
    else:
        inner = (grid >= t0 - 2 * eps) & (grid <= t0 + 2 * eps)
        left = grid[inner & (grid <= t0)]
        right = grid[inner & (grid >= t0)]
        parts = [
            grid[grid < t0 - 2 * eps],
            (left + t0 - 2 * eps) / 2,
            [t0 - 2 * eps, t0 - eps, t0 + eps, t0 + 2 * eps],
            np.linspace(t0 - eps, t0 + eps, 2 * samples + 1),
            (right + t0 + 2 * eps) / 2,
            grid[grid > t0 + 2 * eps],
        ]
    times = np.unique(np.clip(np.concatenate([np.asarray(p, dtype=float) for p in parts]), 0.0, 1.0))
    keep = np.concatenate(([True], np.diff(times) > 1e-13))
    times = times[keep]
    times[0], times[-1] = 0.0, 1.0
    return times


def add_loops(curve: FramedCurve, spec: LoopSpec) -> FramedCurve:
    """
    Inserts n turns of nu_1, translated by the frame at t0. The endpoint lift
    is multiplied by (-1)^n and the total curvature grows by 2 pi n.
    """
    if spec.n < 0:
        raise ValueError("n must be non-negative")
    if spec.n == 0:
        return curve
    eps = spec.window()
    times = _loop_times(curve, spec, eps)

    def relative(t):
        return curve.lift_at(t)

    lifts = insert_loops_lift(relative, spec)(times)
    out = FramedCurve.from_lifts(times, lifts, base=curve.base, metadata=curve.metadata)
    loops = list(curve.metadata.get("loops", [])) + [[float(spec.t0), int(spec.n)]]
    return out.with_metadata(loops=loops)


# -- spreading loops ---------------------------------------------------------


def spread_loops(curve: FramedCurve, n: int) -> FramedCurve:
    """
    Places 2n loops along the curve (one at each end, two at every t_j = j/n)
    and replaces the arcs between them by ellipse bridges through gamma at the
    midpoints. For n large enough the result is locally convex.
    """
    if n < 1:
        raise ValueError("n must be positive")
    eps = 1.0 / (4 * n)
    reach = LOOP_SHARE * eps
    nodes = np.arange(n + 1) / n
    anchors = curve.absolute_lift_at(nodes)

    loops = []
    for j, anchor in enumerate(anchors):
        if j == 0:
            x0, x1, left = 0.0, LOOP_SHARE, anchor
            duration = reach
        elif j == n:
            x0, x1, left = 1.0 - LOOP_SHARE, 1.0, -anchor
            duration = reach
        else:
            x0, x1, left = 1.0 - LOOP_SHARE, 1.0 + LOOP_SHARE, -anchor
            duration = 2 * reach
        segment = nu_segment(x0, x1, LOOP_SAMPLES * 2)
        start = rot.multiply(left, nu1_lift(x0))
        end = rot.multiply(left, nu1_lift(x1))
        loops.append((segment.with_base(start), duration, start, end))

    pieces = [(loops[0][0], loops[0][1])]
    for j in range(1, n + 1):
        z0 = loops[j - 1][3]
        z1 = loops[j][2]
        midpoint = curve.point_at(0.5 * (nodes[j - 1] + nodes[j]))
        try:
            if not bruhat.is_stably_convex_quat(rot.multiply(rot.conjugate(z0), z1)):
                raise NotStablyConvex("bridge endpoints are not stably convex")
            arc = fit_ellipse(z0, midpoint, 0.5, z1)
            bridge = ellipse_curve(arc, BRIDGE_CELLS, start_lift=z0)
        except ConvexaError as e:
            raise BridgeFailed(j, e) from e
        end = rot.multiply(bridge.base, bridge.endpoint_lift)
        if rot.chordal(end, z1) > 1e-6:
            raise BridgeFailed(j, "bridge lift does not reach the next loop")
        pieces.append((bridge, 1.0 / n - 2 * reach))
        pieces.append((loops[j][0], loops[j][1]))

    out = splice(pieces)
    return out.with_metadata(**curve.metadata, spread=n)


def spread_loops_search(curve: FramedCurve, start: int = 2, max_n: int = 256) -> tuple[int, FramedCurve]:
    """Doubles n until every bridge exists and the result is locally convex."""
    n = start
    while n <= max_n:
        try:
            spread = spread_loops(curve, n)
            if spread.is_locally_convex:
                logger.info(f"spread_loops succeeded with n = {n}")
                return n, spread
        except BridgeFailed as e:
            logger.debug(f"spread_loops with n = {n}: {e}")
        n *= 2
    raise BridgeFailed(-1, f"no n up to {max_n} gives a locally convex curve")


# -- grafting ------------------------------------------------------------------


@dataclass(frozen=True)
class GraftSpec:
    t0: float
    t1: float
    s: float
    ell: int = 7
    eps: float | None = None

    def window(self) -> float:
        if not 0.0 < self.t0 < self.t1 < 1.0:
            raise WindowOverflow(f"invalid graft interval [{self.t0}, {self.t1}]")
        eps = self.eps if self.eps is not None else (self.t1 - self.t0) / (8 * max(self.s, 1.0))
        if 4 * self.s * eps > self.t1 - self.t0 + 1e-15:
            raise WindowOverflow(f"4 s eps = {4 * self.s * eps} exceeds t1 - t0")
        return eps


def _check_normalized(curve: FramedCurve, t0: float, t1: float):
    frames = curve.frame_at(np.array([t0, t1]))
    for frame, sign, label in ((frames[0], 1.0, "t0"), (frames[1], -1.0, "t1")):
        point, tangent, normal = frame[:, 0], frame[:, 1], frame[:, 2]
        if abs(tangent[2]) > 1e-8:
            raise NotGraftable(f"tangent at {label} is not horizontal (z = {tangent[2]:.3e})")
        if sign * point[2] <= 0 or sign * normal[2] <= 0:
            raise NotGraftable(f"frame at {label} is not in normalized position")


def _spin(theta) -> np.ndarray:
    """exp(theta k): rotation about e3 by 2 theta."""
    theta = np.asarray(theta, dtype=float)
    return rot.exp_im(theta[..., None] * _Z_AXIS)


def graft_normalized(curve: FramedCurve, t0: float, t1: float, s: float,
                     eps: float | None = None) -> FramedCurve:
    """
    Grafting for a curve whose frames at t0 and t1 are normalized: the middle
    is rotated by 2 pi s about e3 and s latitude circles are inserted at each end.
    """
    spec = GraftSpec(t0, t1, s, eps=eps)
    eps = spec.window()
    _check_normalized(curve, t0, t1)
    if s == 0:
        return curve
    w = s * eps
    grid = curve.grid
    samples = max(LOOP_SAMPLES, int(np.ceil(LOOP_SAMPLES * s)))
    src_left = grid[(grid >= t0) & (grid <= t0 + 2 * w)]
    src_right = grid[(grid >= t1 - 2 * w) & (grid <= t1)]
    times = np.unique(np.concatenate([
        grid[grid < t0],
        np.linspace(t0, t0 + w, samples + 1),
        (src_left + t0 + 2 * w) / 2,
        [t0 + 2 * w, t1 - 2 * w],
        grid[(grid > t0 + 2 * w) & (grid < t1 - 2 * w)],
        (src_right + t1 - 2 * w) / 2,
        np.linspace(t1 - w, t1, samples + 1),
        grid[grid > t1],
    ]))
    keep = np.concatenate(([True], np.diff(times) > 1e-13))
    times = times[keep]

    lift_t0 = curve.absolute_lift_at(t0)
    lift_t1 = curve.absolute_lift_at(t1)
    full_turn = _spin(np.pi * s)
    lifts = curve.absolute_lift_at(times)

    first = (times >= t0) & (times <= t0 + w)
    second = (times > t0 + w) & (times < t0 + 2 * w)
    middle = (times >= t0 + 2 * w) & (times <= t1 - 2 * w)
    fourth = (times > t1 - 2 * w) & (times < t1 - w)
    fifth = (times >= t1 - w) & (times <= t1)

    lifts[first] = rot.multiply(_spin(np.pi * (times[first] - t0) / eps), lift_t0)
    lifts[second] = rot.multiply(full_turn, curve.absolute_lift_at(2 * times[second] - t0 - 2 * w))
    lifts[middle] = rot.multiply(full_turn, lifts[middle])
    lifts[fourth] = rot.multiply(full_turn, curve.absolute_lift_at(2 * times[fourth] - t1 + 2 * w))
    lifts[fifth] = rot.multiply(_spin(np.pi * (t1 - times[fifth]) / eps), lift_t1)

    out = FramedCurve.from_lifts(times, lifts, metadata=curve.metadata)
    return out.with_metadata(graft=[float(t0), float(t1), float(s)])


def graft_matrix(curve: FramedCurve, t0: float, t1: float, ell: int) -> np.ndarray:
    """M = Q0_ell U Q0^-1, the projective map putting the frames at t0, t1 in normalized position."""
    q0, q1 = curve.frame_at(np.array([t0, t1]))
    try:
        u = bruhat.graft_normalizer(q0, q1, ell)
    except (WrongCell, NearBoundary) as e:
        raise NotGraftable(str(e)) from e
    return bruhat.GRAFT_FRAMES[ell][0] @ u @ q0.T


def graft(curve: FramedCurve, spec: GraftSpec) -> FramedCurve:
    """
    Grafts through the normalizing map: pi(M^-1) of the normalized graft of
    pi(M) gamma on [t0, t1]; outside [t0, t1] the samples are untouched.
    """
    eps = spec.window()
    if spec.s == 0:
        return curve
    # t0 and t1 must be samples for the normalized frames there to be exact
    curve = refine(curve, [spec.t0, spec.t1])
    m = graft_matrix(curve, spec.t0, spec.t1, spec.ell)
    normalized = transform(m, curve)
    grafted = graft_normalized(normalized, spec.t0, spec.t1, spec.s, eps)

    window = transform(np.linalg.inv(m), restrict(grafted, spec.t0, spec.t1))
    inside = rot.multiply(window.base, window.lifts)
    start = curve.absolute_lift_at(spec.t0)
    if np.dot(inside[0], start) < 0:
        inside = -inside
    gap = float(rot.chordal(inside[-1], curve.absolute_lift_at(spec.t1)))
    if gap > CLOSURE_TOL:
        raise NoConvergence(f"grafted window misses the lift at t1 = {spec.t1:.6f} by {gap:.3e}")

    grid = curve.grid
    outside_left = grid < spec.t0
    outside_right = grid > spec.t1
    times = np.concatenate([
        grid[outside_left],
        spec.t0 + (spec.t1 - spec.t0) * window.grid,
        grid[outside_right],
    ])
    lifts = np.concatenate([
        curve.absolute_lifts[outside_left],
        inside,
        curve.absolute_lifts[outside_right],
    ])
    out = FramedCurve.from_lifts(times, lifts, metadata=curve.metadata)
    return out.with_metadata(graft=[float(spec.t0), float(spec.t1), float(spec.s), int(spec.ell)])


def middle_map(curve: FramedCurve, spec: GraftSpec) -> np.ndarray:
    """A(s) = M^-1 Pi(exp(s pi k)) M, the map applied to the middle of the graft."""
    m = graft_matrix(curve, spec.t0, spec.t1, spec.ell)
    return np.linalg.inv(m) @ rot.project(_spin(np.pi * spec.s)) @ m


def find_graft_window(curve: FramedCurve, t0: float, delta: float = 1e-3) -> GraftSpec:
    """
    Just past a good step from t0 the relative frame is in one of the open
    cells (13);1, (13);4, (13);7; returns the graft interval and its cell.
    """
    report = next_step(curve, t0)
    if report.kind is not StepKind.GOOD:
        raise NotGraftable(f"step from {t0} is {report.kind.value}, not good")
    for offset in (delta, delta / 4, delta * 4):
        tb = report.t1 + offset
        if tb >= 1.0:
            continue
        try:
            code = bruhat.open_cell_code(curve.relative_frame(t0, tb))
        except NearBoundary:
            continue
        if code in bruhat.GRAFT_FRAMES:
            return GraftSpec(t0, tb, 0.0, code)
    raise NotGraftable(f"no open graftable cell just after ns({t0}) = {report.t1}")
