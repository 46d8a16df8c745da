"""
Curve representations.

A FramedCurve carries the lifted Frenet frame of a spherical curve sampled on a
grid of [0, 1]. Lifts are stored relative to the initial frame (lifts[0] = 1);
an optional base quaternion places the curve anywhere in S^3, so the absolute
lift is base * lifts. Between grid points the lift follows the one-parameter
subgroup through both samples, which makes piecewise-constant speeds exact.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from convexa.errors import Degenerate, NotMonotone
from convexa.geometry import rotations as rot

logger = logging.getLogger(__name__)

DEFAULT_CELLS = 1024
MAX_STEP_ANGLE = 0.2


def speed_from_log(w):
    """v = (w + sqrt(w^2 + 4)) / 2, the positive coordinate chart of log coordinates."""
    w = np.asarray(w, dtype=float)
    return (w + np.sqrt(w * w + 4.0)) / 2.0


def log_from_speed(v):
    v = np.asarray(v, dtype=float)
    return v - 1.0 / v


def nu1_lift(x) -> np.ndarray:
    """Lift of the frame of the standard circle: exp(pi x k_hat)."""
    x = np.asarray(x, dtype=float)
    return rot.exp_im(np.pi * x[..., None] * rot.K_HAT_AXIS)


def _check_grid(grid: np.ndarray):
    if grid.ndim != 1 or len(grid) < 2:
        raise ValueError("grid needs at least two points")
    if abs(grid[0]) > 1e-12 or abs(grid[-1] - 1.0) > 1e-12:
        raise ValueError("grid must start at 0 and end at 1")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")


@dataclass(frozen=True, eq=False)
class LogCoords:
    """
    Piecewise-constant log coordinates on the cells of a grid.

    In chart "L" the second field is w_hat and v_hat = (w_hat + sqrt(w_hat^2 + 4))/2 > 0.
    In chart "I" (immersions) the second field is v_hat itself and may be <= 0.
    """
    grid: np.ndarray
    w: np.ndarray
    w_hat: np.ndarray
    chart: str = "L"

    def __post_init__(self):
        object.__setattr__(self, "grid", np.asarray(self.grid, dtype=float))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        object.__setattr__(self, "w_hat", np.asarray(self.w_hat, dtype=float))
        _check_grid(self.grid)
        cells = len(self.grid) - 1
        if self.w.shape != (cells,) or self.w_hat.shape != (cells,):
            raise ValueError(f"expected {cells} samples per field")
        if not (np.all(np.isfinite(self.w)) and np.all(np.isfinite(self.w_hat))):
            raise ValueError("log coordinates must be finite")
        if self.chart not in ("L", "I"):
            raise ValueError(f"unknown chart {self.chart!r}")

    def speeds(self) -> tuple[np.ndarray, np.ndarray]:
        v = speed_from_log(self.w)
        v_hat = speed_from_log(self.w_hat) if self.chart == "L" else self.w_hat
        return v, v_hat

    @classmethod
    def from_speeds(cls, grid, v, v_hat) -> "LogCoords":
        v = np.asarray(v, dtype=float)
        v_hat = np.asarray(v_hat, dtype=float)
        if np.all(v_hat > 0):
            return cls(grid, log_from_speed(v), log_from_speed(v_hat), "L")
        return cls(grid, log_from_speed(v), v_hat, "I")

    @classmethod
    def constant(cls, v: float, v_hat: float, cells: int = DEFAULT_CELLS) -> "LogCoords":
        grid = np.linspace(0.0, 1.0, cells + 1)
        return cls.from_speeds(grid, np.full(cells, v), np.full(cells, v_hat))


@dataclass(frozen=True, eq=False)
class FramedCurve:
    grid: np.ndarray
    lifts: np.ndarray
    v: np.ndarray
    v_hat: np.ndarray
    base: np.ndarray = field(default_factory=lambda: rot.ONE.copy())
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "grid", np.asarray(self.grid, dtype=float))
        object.__setattr__(self, "lifts", np.asarray(self.lifts, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        object.__setattr__(self, "v_hat", np.asarray(self.v_hat, dtype=float))
        object.__setattr__(self, "base", rot.normalize(self.base))
        _check_grid(self.grid)
        n = len(self.grid)
        if self.lifts.shape != (n, 4) or self.v.shape != (n,) or self.v_hat.shape != (n,):
            raise ValueError("lifts, v and v_hat must have one entry per grid point")
        if rot.chordal(self.lifts[0], rot.ONE) > 1e-9:
            raise ValueError("lifts must start at the identity")
        if np.any(self.v[:-1] <= 0):
            logger.warning("curve has non-positive speed on some cells")

    # -- basic accessors -------------------------------------------------

    @property
    def endpoint_lift(self) -> np.ndarray:
        return self.lifts[-1]

    @property
    def cells(self) -> int:
        return len(self.grid) - 1

    @property
    def absolute_lifts(self) -> np.ndarray:
        return rot.multiply(self.base, self.lifts)

    @property
    def is_locally_convex(self) -> bool:
        return bool(np.all(self.v_hat[:-1] > 0))

    def frames(self) -> np.ndarray:
        return rot.project(self.absolute_lifts)

    def positions(self) -> np.ndarray:
        return self.frames()[..., :, 0]

    def cell_index(self, t) -> np.ndarray:
        idx = np.searchsorted(self.grid, np.asarray(t, dtype=float), side="right") - 1
        return np.clip(idx, 0, self.cells - 1)

    def lift_at(self, t) -> np.ndarray:
        """Relative lift at arbitrary times (vectorized)."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        idx = self.cell_index(t)
        t0 = self.grid[idx]
        t1 = self.grid[idx + 1]
        frac = (t - t0) / (t1 - t0)
        return rot.slerp(self.lifts[idx], self.lifts[idx + 1], frac)

    def absolute_lift_at(self, t) -> np.ndarray:
        return rot.multiply(self.base, self.lift_at(t))

    def frame_at(self, t) -> np.ndarray:
        return rot.project(self.absolute_lift_at(t))

    def point_at(self, t) -> np.ndarray:
        return self.frame_at(t)[..., :, 0]

    def tangent_at(self, t) -> np.ndarray:
        return self.frame_at(t)[..., :, 1]

    def normal_at(self, t) -> np.ndarray:
        return self.frame_at(t)[..., :, 2]

    def relative_lift(self, t0, t) -> np.ndarray:
        """Lift of Gamma(t0; t) = Gamma(t0)^-1 Gamma(t)."""
        return rot.multiply(rot.conjugate(self.lift_at(t0)), self.lift_at(t))

    def relative_frame(self, t0, t) -> np.ndarray:
        return rot.project(self.relative_lift(t0, t))

    def speeds_at(self, t) -> tuple[np.ndarray, np.ndarray]:
        idx = self.cell_index(t)
        return self.v[idx], self.v_hat[idx]

    # -- derived copies --------------------------------------------------

    def with_base(self, base: np.ndarray) -> "FramedCurve":
        return replace(self, base=rot.normalize(base))

    def with_metadata(self, **metadata) -> "FramedCurve":
        merged = dict(self.metadata)
        merged.update(metadata)
        return replace(self, metadata=merged)

    @classmethod
    def from_lifts(cls, grid, lifts, base=None, metadata=None) -> "FramedCurve":
        """
        Builds a curve from sampled lifts. If lifts[0] is not 1 the samples are
        taken as absolute and the curve is rebased on them. Speeds are read off
        the logarithm of consecutive relative lifts.
        """
        grid = np.asarray(grid, dtype=float)
        lifts = rot.normalize(lifts)
        base = rot.ONE if base is None else rot.normalize(base)
        first = lifts[0]
        base = rot.multiply(base, first)
        relative = rot.multiply(rot.conjugate(first), lifts)
        relative[0] = rot.ONE

        steps = rot.log_unit(rot.hamilton(rot.conjugate(relative[:-1]), relative[1:]))
        dt = np.diff(grid)
        v = 2.0 * steps[:, 2] / dt
        v_hat = 2.0 * steps[:, 0] / dt
        v = np.append(v, v[-1])
        v_hat = np.append(v_hat, v_hat[-1])
        return cls(grid, relative, v, v_hat, base, dict(metadata or {}))

    @classmethod
    def from_lift_function(cls, lift_fn: Callable, grid, metadata=None) -> "FramedCurve":
        """Samples a (vectorized) absolute lift function on a grid."""
        grid = np.asarray(grid, dtype=float)
        return cls.from_lifts(grid, lift_fn(grid), metadata=metadata)


@dataclass(frozen=True, eq=False)
class EllipseArc:
    """The arc t -> pi(M) nu_1(a + b t), t in [0, 1]."""
    M: np.ndarray
    a: float = 0.0
    b: float = 1.0
    residual: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.M, dtype=float)
        object.__setattr__(self, "M", m)
        if m.shape != (3, 3):
            raise ValueError("M must be 3x3")
        if abs(np.linalg.det(m) - 1.0) > 1e-9:
            raise Degenerate(f"det M = {np.linalg.det(m)!r}, expected 1")
        if self.b == 0:
            raise ValueError("b must be non-zero")


def unit_determinant(a: np.ndarray) -> np.ndarray:
    """Scales a matrix with positive determinant into SL_3."""
    a = np.asarray(a, dtype=float)
    det = np.linalg.det(a)
    if not np.isfinite(det) or det <= 1e-300:
        raise Degenerate(f"matrix has determinant {det!r}")
    return a / np.cbrt(det)


# -- integration -------------------------------------------------------


def integrate_frame(coords: LogCoords, max_angle: float = MAX_STEP_ANGLE) -> FramedCurve:
    """
    Solves q' = q (v_hat i + v k) / 2 exactly on every cell. Cells whose
    rotation exceeds max_angle are subdivided so consecutive lifts stay close.
    """
    v, v_hat = coords.speeds()
    dt = np.diff(coords.grid)
    half = 0.5 * np.sqrt(v * v + v_hat * v_hat) * dt
    substeps = np.maximum(1, np.ceil(half / max_angle).astype(int))

    times = [0.0]
    lifts = [rot.ONE.copy()]
    speeds = []
    current = rot.ONE.copy()
    for i, m in enumerate(substeps):
        generator = np.array([v_hat[i], 0.0, v[i]]) * (0.5 * dt[i] / m)
        step = rot.exp_im(generator)
        for s in range(1, m + 1):
            current = rot.multiply(current, step)
            lifts.append(current)
            times.append(coords.grid[i] + dt[i] * s / m)
            speeds.append((v[i], v_hat[i]))
    times[-1] = 1.0
    speeds.append(speeds[-1])
    speeds = np.array(speeds)
    return FramedCurve(np.array(times), np.array(lifts), speeds[:, 0], speeds[:, 1])


def integrate_speeds(v_fn: Callable, v_hat_fn: Callable, cells: int = DEFAULT_CELLS,
                     tol: float = 1e-9, max_cells: int = 2 ** 18) -> FramedCurve:
    """
    Integrates smooth speed functions by midpoint sampling, doubling the grid
    until the endpoint lift moves less than tol.
    """
    previous = None
    while True:
        grid = np.linspace(0.0, 1.0, cells + 1)
        mid = 0.5 * (grid[:-1] + grid[1:])
        coords = LogCoords.from_speeds(grid, v_fn(mid), v_hat_fn(mid))
        curve = integrate_frame(coords)
        if previous is not None:
            moved = float(rot.chordal(curve.endpoint_lift, previous.endpoint_lift))
            logger.debug(f"{cells} cells: endpoint moved {moved:.3e}")
            if moved < tol:
                return curve
        if cells * 2 > max_cells:
            logger.warning(f"integration stopped at {cells} cells without reaching {tol}")
            return curve
        previous = curve
        cells *= 2


def extract_coords(curve: FramedCurve) -> LogCoords:
    return LogCoords.from_speeds(curve.grid, curve.v[:-1], curve.v_hat[:-1])


def total_curvature(curve: FramedCurve) -> float:
    """Twice the length of the lifted frame in S^3."""
    steps = rot.angle_between(curve.lifts[:-1], curve.lifts[1:])
    return float(2.0 * np.sum(steps))


def geodesic_curvature(curve: FramedCurve) -> np.ndarray:
    return curve.v_hat / curve.v


def tangent_variation(curve: FramedCurve) -> np.ndarray:
    """Density of total curvature, sqrt(v^2 + v_hat^2)."""
    return np.sqrt(curve.v ** 2 + curve.v_hat ** 2)


# -- operations on curves ---------------------------------------------


def transform(a: np.ndarray, curve: FramedCurve, max_angle: float = 0.25,
              max_rounds: int = 12) -> FramedCurve:
    """
    Projective image pi(A) of a curve, relifted from the transformed initial
    frame. Cells where pi(A) stretches the frame by more than max_angle are
    subdivided before lifting.
    """
    a = unit_determinant(a)
    ts = curve.grid
    for _ in range(max_rounds):
        images = a @ curve.frame_at(ts)
        if not np.all(np.isfinite(images)):
            raise Degenerate("projective image is not finite")
        frames = rot.gram_schmidt(images)
        turn = np.einsum("nji,nji->n", frames[:-1], frames[1:])
        angles = np.arccos(np.clip((turn - 1.0) / 2.0, -1.0, 1.0))
        wide = np.flatnonzero(angles > max_angle)
        if len(wide) == 0:
            break
        ts = np.union1d(ts, 0.5 * (ts[wide] + ts[wide + 1]))
    else:
        logger.warning(f"transform: frames still {np.max(angles):.3f} apart after refinement")
    start = rot.rotation_to_quaternion(frames[0])
    if np.dot(start, curve.base) < 0:
        start = -start
    lifted = rot.lift_path(frames, start)
    return FramedCurve.from_lifts(ts, lifted, metadata=curve.metadata)


def splice(pieces: Sequence[tuple[FramedCurve, float]]) -> FramedCurve:
    """
    Juxtaposes based curves, giving piece i the share durations[i] of [0, 1].
    The base of the result is the base of the first piece.
    """
    durations = np.array([d for _, d in pieces], dtype=float)
    if np.any(durations <= 0):
        raise ValueError("durations must be positive")
    durations = durations / durations.sum()

    times, lifts, v, v_hat = [], [], [], []
    offset = 0.0
    running = rot.ONE.copy()
    for (curve, _), duration in zip(pieces, durations):
        times.append(offset + duration * curve.grid[:-1])
        lifts.append(rot.multiply(running, curve.lifts[:-1]))
        v.append(curve.v[:-1] / duration)
        v_hat.append(curve.v_hat[:-1] / duration)
        running = rot.multiply(running, curve.endpoint_lift)
        offset += duration
    last = pieces[-1][0]
    times.append([1.0])
    lifts.append(running[None, :])
    v.append([last.v[-1] / durations[-1]])
    v_hat.append([last.v_hat[-1] / durations[-1]])
    return FramedCurve(
        np.concatenate(times),
        np.concatenate(lifts),
        np.concatenate(v),
        np.concatenate(v_hat),
        pieces[0][0].base,
    )


def concat(c1: FramedCurve, c2: FramedCurve) -> FramedCurve:
    return splice([(c1, 0.5), (c2, 0.5)])


def _sample_times(curve: FramedCurve, a: float, b: float) -> np.ndarray:
    inner = curve.grid[(curve.grid > a + 1e-14) & (curve.grid < b - 1e-14)]
    return np.concatenate(([a], inner, [b]))


def refine(curve: FramedCurve, times) -> FramedCurve:
    """The same curve with samples added at the given interior times."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    times = np.unique(times[(times > 0.0) & (times < 1.0)])
    if len(times):
        times = times[np.concatenate(([True], np.diff(times) > 1e-12))]
        times = times[np.min(np.abs(times[:, None] - curve.grid[None, :]), axis=1) > 1e-12]
    if len(times) == 0:
        return curve
    grid = np.union1d(curve.grid, times)
    return FramedCurve.from_lifts(grid, curve.absolute_lift_at(grid), metadata=curve.metadata)


def restrict(curve: FramedCurve, a: float, b: float) -> FramedCurve:
    """The arc on [a, b], rescaled to [0, 1]; absolute frames are preserved."""
    if not 0.0 <= a < b <= 1.0:
        raise ValueError(f"invalid window [{a}, {b}]")
    ts = _sample_times(curve, a, b)
    lifts = curve.absolute_lift_at(ts)
    return FramedCurve.from_lifts((ts - a) / (b - a), lifts, metadata=curve.metadata)


def shift_closed(curve: FramedCurve, delta: float) -> FramedCurve:
    """
    The closed curve started at time delta: t -> lift(t + delta), continued
    periodically through lift(1 + x) = lift(1) lift(x).
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    if delta == 0.0:
        return curve
    head = _sample_times(curve, delta, 1.0)
    tail = _sample_times(curve, 0.0, delta)
    times = np.concatenate((head - delta, tail[1:] + 1.0 - delta))
    lifts = np.concatenate((
        curve.lift_at(head),
        rot.multiply(curve.endpoint_lift, curve.lift_at(tail[1:])),
    ))
    return FramedCurve.from_lifts(times, rot.multiply(curve.base, lifts), metadata=curve.metadata)


def reparametrize(curve: FramedCurve, phi: Callable) -> FramedCurve:
    """
    The curve t -> curve(phi(t)) for an increasing phi with phi(0)=0, phi(1)=1.
    The original grid points are kept as samples (at phi^-1 of their times),
    so no cell of the original lift is cut short.
    """
    values = np.asarray(phi(curve.grid), dtype=float)
    if abs(values[0]) > 1e-12 or abs(values[-1] - 1.0) > 1e-12:
        raise NotMonotone("phi must fix 0 and 1")
    if np.any(np.diff(values) <= 0):
        raise NotMonotone("phi is not strictly increasing on the grid")
    values[0], values[-1] = 0.0, 1.0

    fine = np.union1d(np.linspace(0.0, 1.0, 8 * curve.cells + 1), curve.grid)
    fine_values = np.asarray(phi(fine), dtype=float)
    if np.any(np.diff(fine_values) <= 0):
        raise NotMonotone("phi is not strictly increasing")
    inverse = np.interp(curve.grid, fine_values, fine)

    params = np.concatenate((values, curve.grid))
    times = np.concatenate((curve.grid, inverse))
    order = np.argsort(params, kind="stable")
    params, times = params[order], times[order]
    keep = np.concatenate(([True], (np.diff(params) > 1e-12) & (np.diff(times) > 1e-12)))
    params, times = params[keep], times[keep]
    monotone = np.concatenate(([True], np.diff(times) > 0))
    params, times = params[monotone], times[monotone]
    times[0], times[-1] = 0.0, 1.0

    lifts = curve.lift_at(params)
    lifts[0] = rot.ONE
    return FramedCurve.from_lifts(times, rot.multiply(curve.base, lifts), metadata=curve.metadata)


# -- ellipses ------------------------------------------------------------


def eval_ellipse(e: EllipseArc, t) -> tuple[np.ndarray, np.ndarray]:
    """Point and frame of the arc at t (vectorized)."""
    x = e.a + e.b * np.asarray(t, dtype=float)
    frames = rot.gram_schmidt(e.M @ rot.project(nu1_lift(x)))
    return frames[..., :, 0], frames


def ellipse_curve(e: EllipseArc, cells: int = 256, start_lift=None) -> FramedCurve:
    """
    Samples an ellipse arc as a framed curve. The lift starts at start_lift when
    given (it must project to the initial frame).
    """
    ts = np.linspace(0.0, 1.0, cells + 1)
    _, frames = eval_ellipse(e, ts)
    if start_lift is None:
        start_lift = rot.rotation_to_quaternion(frames[0])
    lifted = rot.lift_path(frames, start_lift)
    return FramedCurve.from_lifts(ts, lifted)
