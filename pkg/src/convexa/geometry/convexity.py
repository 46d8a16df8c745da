"""
Next-step scans, multiconvexity and the M_k coordinates.

All scans look at the relative frame Q(t) = Gamma(t0)^-1 Gamma(t). While the
arc from t0 is convex, Q(t) stays in the open cell (13);2, i.e. Q31 > 0 and
the south-west minor Q21 Q32 - Q22 Q31 > 0. The frame leaves the cell either
through a good exit (a sign change of one of the minors) or by coming back to
the identity (a bad step), where both minors touch zero without changing sign;
the second case is found through the minima of the distance to the identity.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import bisect, brentq, minimize_scalar

from convexa.errors import NearBoundary, NotInUk, NotLocallyConvex, WrongCell
from convexa.geometry import bruhat
from convexa.geometry import rotations as rot
from convexa.geometry.curves import FramedCurve

logger = logging.getLogger(__name__)

BISECTION_TOL = 1e-10
BAD_STEP_TOL = 1e-6
SIGN_TOL = 1e-12
MAX_SCAN_ANGLE = 0.05
CANDIDATE_DISTANCE = 0.25
END_TOL = 1e-9
START_ANGLE = 1e-3


class StepKind(str, Enum):
    GOOD = "good"
    BAD = "bad"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class StepReport:
    t0: float
    t1: float | None
    boundary_cell: bruhat.CellId | None
    kind: StepKind

    @property
    def bounded(self) -> bool:
        return self.kind is not StepKind.UNBOUNDED


@dataclass(frozen=True)
class MulticonvexReport:
    multiplicity: int | None
    breakpoints: tuple[float, ...] = field(default_factory=tuple)

    @property
    def is_complicated(self) -> bool:
        return self.multiplicity is None

    def __str__(self) -> str:
        return "complicated" if self.is_complicated else f"multiconvex of multiplicity {self.multiplicity}"


class GoodArcMembership(str, Enum):
    A1 = "A1"
    A2 = "A2"
    OUTSIDE = "outside"


def _scan_times(curve: FramedCurve, start: float, stop: float) -> np.ndarray:
    """Grid points in (start, stop], refined so the lift moves at most MAX_SCAN_ANGLE per sample."""
    steps = rot.angle_between(curve.lifts[:-1], curve.lifts[1:])
    pieces = []
    for i in range(curve.cells):
        a, b = curve.grid[i], curve.grid[i + 1]
        if b <= start or a >= stop:
            continue
        m = max(1, int(np.ceil(steps[i] / MAX_SCAN_ANGLE)))
        pieces.append(np.linspace(a, b, m + 1)[1:])
    if not pieces:
        return np.array([stop])
    ts = np.concatenate(pieces)
    ts = ts[(ts > start) & (ts < stop)]
    return np.append(ts, stop)


def _cell_minimum(curve: FramedCurve, t0: float, t, minor_sign: int = 1) -> np.ndarray:
    q31, minor = bruhat.open_cell_minors(curve.relative_frame(t0, t))
    return np.minimum(q31, minor_sign * minor)


def _distance_to_start(curve: FramedCurve, t0: float, t) -> np.ndarray:
    r = curve.relative_lift(t0, t)
    return np.sqrt(np.clip(1.0 - r[..., 0] ** 2, 0.0, None))


def _check_local_convexity(curve: FramedCurve, t0: float):
    first = int(curve.cell_index(t0))
    if np.any(curve.v_hat[first:-1] <= 0):
        raise NotLocallyConvex(f"v_hat <= 0 on some cell after t = {t0:g}")


def _refine_sign_change(curve, t0, a, b, minor_sign, tol) -> float:
    def f(t):
        return float(_cell_minimum(curve, t0, t, minor_sign))

    fb = f(b)
    if fb > 0:
        return b
    return bisect(f, a, b, xtol=tol)


def _first_bad_candidate(curve, t0, ts, dist, tol) -> float | None:
    """Earliest local minimum of the distance to the start frame that is (numerically) zero."""
    if dist[-1] < tol:
        last_candidate = float(ts[-1])
    else:
        last_candidate = None
    for i in range(1, len(ts) - 1):
        if dist[i] > CANDIDATE_DISTANCE or dist[i] > dist[i - 1] or dist[i] > dist[i + 1]:
            continue
        res = minimize_scalar(
            lambda t: float(_distance_to_start(curve, t0, t)),
            bounds=(ts[i - 1], ts[i + 1]), method="bounded",
            options={"xatol": BISECTION_TOL},
        )
        if res.fun < tol:
            return float(res.x)
    return last_candidate


def next_step(curve: FramedCurve, t0: float, horizon: float = 1.0, minor_sign: int = 1,
              bisection_tol: float = BISECTION_TOL, bad_step_tol: float = BAD_STEP_TOL) -> StepReport:
    """
    ns(t0): the first time the relative frame leaves the open convex cell.
    Scanning stops at horizon; no exit before it is reported as UNBOUNDED.
    """
    if not 0.0 <= t0 < 1.0:
        raise ValueError(f"t0 = {t0} outside [0, 1)")
    _check_local_convexity(curve, t0)

    ts = _scan_times(curve, t0, horizon)
    # Gamma(t0; t0) = I: skip the samples where the minors are still at rounding level
    moved = rot.angle_between(curve.lift_at(t0), curve.lift_at(ts))
    far = np.flatnonzero(moved >= START_ANGLE)
    ts = ts[int(far[0]) if len(far) else len(ts) - 1:]
    values = _cell_minimum(curve, t0, ts, minor_sign)
    dist = _distance_to_start(curve, t0, ts)

    exit_time = None
    hits = np.flatnonzero(values <= SIGN_TOL)
    if len(hits):
        i = int(hits[0])
        if i == 0:
            exit_time = float(ts[0])
        else:
            exit_time = _refine_sign_change(curve, t0, ts[i - 1], ts[i], minor_sign, bisection_tol)

    stop = len(ts) if exit_time is None else int(np.searchsorted(ts, exit_time)) + 1
    bad_time = _first_bad_candidate(curve, t0, ts[:stop], dist[:stop], bad_step_tol)

    if bad_time is not None and (exit_time is None or bad_time <= exit_time + bisection_tol):
        logger.debug(f"bad step from {t0:.6f} to {bad_time:.10f}")
        return StepReport(t0, bad_time, bruhat.IDENTITY_CELL,
                          StepKind.BAD)
    if exit_time is None:
        return StepReport(t0, None, None, StepKind.UNBOUNDED)

    if float(_distance_to_start(curve, t0, exit_time)) < bad_step_tol:
        return StepReport(t0, exit_time, bruhat.IDENTITY_CELL,
                          StepKind.BAD)
    cell = bruhat.cell_with_retries(curve.relative_frame(t0, exit_time))
    if cell == bruhat.IDENTITY_CELL:
        return StepReport(t0, exit_time, cell, StepKind.BAD)
    # a curve may end on any boundary cell; inside the scan only the good exits occur
    if cell.name not in bruhat.GOOD_EXIT_CELLS and exit_time < horizon - END_TOL:
        raise WrongCell(f"step from {t0:.6f} exits at {exit_time:.10f} through {cell}, not a good exit cell")
    return StepReport(t0, exit_time, cell, StepKind.GOOD)


def is_convex_arc(curve: FramedCurve, t0: float, t1: float, **kwargs) -> bool:
    if not 0.0 <= t0 < t1 <= 1.0:
        raise ValueError(f"invalid arc [{t0}, {t1}]")
    report = next_step(curve, t0, horizon=t1, **kwargs)
    return not report.bounded or report.t1 >= t1 - END_TOL


def is_stably_convex_arc(curve: FramedCurve, t0: float, t1: float, **kwargs) -> bool:
    if not is_convex_arc(curve, t0, t1, **kwargs):
        return False
    return bool(bruhat.is_open_convex(curve.relative_frame(t0, t1)))


def multiconvex_multiplicity(curve: FramedCurve, **kwargs) -> MulticonvexReport:
    """Iterates next_step from 0; all bad steps means multiconvex."""
    breakpoints = [0.0]
    t = 0.0
    while True:
        report = next_step(curve, t, **kwargs)
        if not report.bounded:
            breakpoints.append(1.0)
            return MulticonvexReport(len(breakpoints) - 1, tuple(breakpoints))
        at_end = report.t1 >= 1.0 - END_TOL
        if report.kind is StepKind.BAD:
            breakpoints.append(1.0 if at_end else report.t1)
            if at_end:
                return MulticonvexReport(len(breakpoints) - 1, tuple(breakpoints))
            t = report.t1
            continue
        if at_end and report.boundary_cell.name in bruhat.CONVEX_CELLS:
            breakpoints.append(1.0)
            return MulticonvexReport(len(breakpoints) - 1, tuple(breakpoints))
        logger.debug(f"good step [{t:.6f}, {report.t1:.6f}] through {report.boundary_cell}")
        return MulticonvexReport(None, tuple(breakpoints))


def previous_step(curve: FramedCurve, t1: float, **kwargs) -> float | None:
    """
    The inverse of ns at t1: the t0 with ns(t0) = t1, or None when ns(0) > t1.
    ns is strictly increasing on complicated curves, so bisection applies.
    """
    def offset(t0):
        report = next_step(curve, t0, **kwargs)
        return (report.t1 if report.bounded else 2.0) - t1

    if offset(0.0) > 0:
        return None
    upper = t1 - 1e-9
    if offset(upper) < 0:
        return None
    return brentq(offset, 0.0, upper, xtol=BISECTION_TOL)


def classify_good_arc_cell(q: np.ndarray) -> GoodArcMembership:
    name = bruhat.cell_with_retries(q).name
    if name in bruhat.A1_CELLS:
        return GoodArcMembership.A1
    if name in bruhat.A2_CELLS:
        return GoodArcMembership.A2
    return GoodArcMembership.OUTSIDE


def good_arc_membership(curve: FramedCurve, ta: float, tb: float) -> GoodArcMembership:
    if not 0.0 <= ta < tb <= 1.0:
        raise ValueError(f"invalid arc [{ta}, {tb}]")
    return classify_good_arc_cell(curve.relative_frame(ta, tb))


def is_good_arc(curve: FramedCurve, t0: float, t1: float, samples: int = 16, **kwargs) -> bool:
    """Checks the three conditions of a good arc on a sample grid of [t0, t1]."""
    if not 0.0 < t0 < t1 < 1.0:
        return False
    forward = next_step(curve, t0, **kwargs)
    backward = previous_step(curve, t1, **kwargs)
    if not forward.bounded or backward is None:
        return False
    if not t0 < backward < forward.t1 < t1:
        return False
    for t in np.linspace(t0, backward, samples):
        if next_step(curve, float(t), **kwargs).kind is not StepKind.GOOD:
            return False
    for ta in np.linspace(t0, t1, samples, endpoint=False):
        report = next_step(curve, float(ta), horizon=t1, **kwargs)
        if not report.bounded:
            continue
        for tb in np.linspace(report.t1, t1, samples)[1:]:
            try:
                if good_arc_membership(curve, float(ta), float(tb)) is not GoodArcMembership.A1:
                    return False
            except NearBoundary:
                logger.debug(f"skipping boundary sample ({ta:.4f}, {tb:.4f})")
    return True


# -- M_k coordinates -------------------------------------------------------


def _crossings(curve: FramedCurve) -> list[float]:
    ts = np.concatenate(([0.0], _scan_times(curve, 0.0, 1.0)))
    y = curve.point_at(ts)[:, 1]
    if abs(y[0]) > 1e-9:
        raise NotInUk("crossings", f"gamma(0) is off the geodesic (y = {y[0]:.3e})")

    def height(t):
        return float(curve.point_at(t)[1])

    last = len(ts) - 1
    closes = abs(y[last]) <= 1e-9
    roots = [0.0]
    for i in range(1, last):
        if abs(y[i]) <= 1e-13:
            roots.append(float(ts[i]))
            continue
        j = i + 1
        if j == last and closes:
            continue
        if abs(y[j]) > 1e-13 and y[i] * y[j] < 0:
            roots.append(brentq(height, ts[i], ts[j], xtol=1e-13))
    return roots


def _window_angle(raw: float, low: float) -> float:
    """The representative of raw (mod 2 pi) in (low, low + pi)."""
    value = low + np.mod(raw - low, 2 * np.pi)
    if not low < value < low + np.pi:
        raise NotInUk("distinct", f"angle {raw:.6f} outside the window ({low:.6f}, {low + np.pi:.6f})")
    return float(value)


def mk_coordinates(curve: FramedCurve, k: int) -> np.ndarray:
    """
    (theta_1, eta_1, ..., theta_{k-1}, eta_{k-1}) for a curve crossing the
    great circle y = 0 exactly 2k times; the curve is in M_k iff all vanish.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    roots = _crossings(curve)
    if len(roots) != 2 * k:
        raise NotInUk("crossings", f"found {len(roots)} crossings, expected {2 * k}")

    frames = curve.frame_at(np.array(roots))
    points, tangents = frames[:, :, 0], frames[:, :, 1]
    for i, (t, tangent) in enumerate(zip(roots, tangents)):
        if abs(tangent[1]) < 1e-6:
            raise NotInUk("tangential", f"crossing at t = {t:.6f}")
        expected = 1.0 if i % 2 == 0 else -1.0
        if np.sign(tangent[1]) != expected:
            raise NotInUk("orientation", f"crossing {i} at t = {t:.6f} has the wrong direction")
    gaps = rot.chordal(points[1:], points[:-1])
    if np.any(gaps < 1e-6):
        raise NotInUk("distinct", "consecutive crossings coincide")

    for a, b in zip(roots, roots[1:] + [1.0]):
        if not is_convex_arc(curve, a, b):
            raise NotInUk("convexity", f"arc [{a:.6f}, {b:.6f}] is not convex")

    thetas = [0.0]
    for i in range(1, len(roots)):
        raw = float(np.arctan2(points[i, 2], points[i, 0]))
        low = thetas[-1] if i % 2 == 1 else thetas[-1] - np.pi
        thetas.append(_window_angle(raw, low))

    coords = []
    for j in range(1, k):
        i = 2 * j
        theta = thetas[i]
        normal = np.array([-np.sin(theta), 0.0, np.cos(theta)])
        eta = float(np.arctan2(tangents[i] @ normal, tangents[i][1]))
        coords.extend([theta, eta])
    return np.array(coords)
