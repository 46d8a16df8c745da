"""
Topological invariants of families of locally convex curves.

A family g maps a compact domain (the sphere, a power of the disk or an
interval) into spaces of framed curves. Two integers separate families that
are not homotopic: the degree of the lifted-frame map S^2 x S^1 -> S^3 and
the signed count of intersections with the multiconvex strata M_k.
"""
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.ndimage import minimum_filter

from convexa.config.loader import TopologySettings
from convexa.errors import (
    ConvexaError,
    NoConvergence,
    NonTransversal,
    NotInUk,
    TooCoarse,
    WrongEndpoint,
)
from convexa.geometry import rotations as rot
from convexa.geometry.convexity import mk_coordinates, multiconvex_multiplicity
from convexa.geometry.curves import DEFAULT_CELLS, FramedCurve
from convexa.geometry.deform import LoopSpec, add_loops, insert_loops_lift
from convexa.geometry.families import g0, g0_lift, h_hat, sphere_point

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-12
NEWTON_STALL_TOL = 1e-10
NEWTON_MAX_ITER = 60
FD_STEP = 1e-6
DET_TOL = 1e-6
MAX_GRID_STEP = 0.35
CANDIDATE_CEILING = 2 * MAX_GRID_STEP
DEDUP_TOL = 1e-4
ENDPOINT_TOL = 1e-6
MK_CANDIDATE = 0.5
MK_REFINE_TOL = 1e-9
MK_STALL_TOL = 1e-6
ZERO_LOOP_RADIUS = 0.05
ZERO_LOOP_SAMPLES = 64
MK_SCAN_COARSENING = 8

REGULAR_VALUES = (
    -rot.ONE,
    rot.multiply(rot.exp_im(0.37 * np.pi * rot.K_HAT_AXIS), -rot.ONE),
    rot.multiply(rot.exp_im(0.61 * np.pi * rot.I_HAT_AXIS), -rot.ONE),
    rot.normalize(rot.quat(-0.8, 0.3, -0.4, 0.33)),
)


class Domain(str, Enum):
    SPHERE2 = "sphere2"
    DISK2_POWER = "disk2-power"
    INTERVAL = "interval"


class Component(str, Enum):
    NEG_CONVEX = "NegConvex"
    POS = "Pos"
    NEG_NONCONVEX = "NegNonconvex"


@dataclass(frozen=True, eq=False)
class FamilyMap:
    """
    A family of framed curves over a domain.

    Sphere points are unit vectors of shape (3,), disk-power points have
    shape (power, 2) and interval points are scalars. When lift is given it
    evaluates absolute lifts for many points at once: (m, *point) x (n,) ->
    (m, n, 4); otherwise lifts are read off the evaluated curves.
    """
    name: str
    domain: Domain
    evaluator: Callable[[np.ndarray], FramedCurve]
    lift: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    power: int = 1
    resolution: TopologySettings = field(default_factory=TopologySettings)

    @property
    def dimension(self) -> int:
        if self.domain is Domain.SPHERE2:
            return 2
        if self.domain is Domain.DISK2_POWER:
            return 2 * self.power
        return 1

    def lift_values(self, points: np.ndarray, t: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.lift is not None:
            return self.lift(points, t)
        return np.stack([self.evaluator(p).absolute_lift_at(t) for p in points])


@dataclass(frozen=True, eq=False)
class Preimage:
    point: np.ndarray
    t: float
    sign: int


@dataclass(frozen=True, eq=False)
class DegreeReport:
    value: int
    preimages: tuple[Preimage, ...]
    regular_value: np.ndarray


@dataclass(frozen=True, eq=False)
class MkZero:
    point: np.ndarray
    local_degree: int


@dataclass(frozen=True, eq=False)
class IntersectionReport:
    value: int
    k: int
    zeros: tuple[MkZero, ...]
    unresolved: tuple[np.ndarray, ...] = ()


# -- families used by the checks ---------------------------------------------


def g0_family(cells: int = DEFAULT_CELLS, resolution: TopologySettings | None = None) -> FamilyMap:
    return FamilyMap(
        name="g0",
        domain=Domain.SPHERE2,
        evaluator=lambda p: g0(p, cells),
        lift=g0_lift,
        resolution=resolution or TopologySettings(),
    )


def looped_family(family: FamilyMap, spec: LoopSpec) -> FamilyMap:
    """family^[t0#n]: the same loops added at a fixed time to every curve."""
    if family.lift is None:
        lift = None
    else:
        def lift(points, t):
            return insert_loops_lift(lambda tt: family.lift(points, tt), spec)(t)

    return FamilyMap(
        name=f"{family.name}[{spec.t0:g}#{spec.n}]",
        domain=family.domain,
        evaluator=lambda p: add_loops(family.evaluator(p), spec),
        lift=lift,
        power=family.power,
        resolution=family.resolution,
    )


def constant_family(curve: FramedCurve, domain: Domain = Domain.SPHERE2, power: int = 1,
                    resolution: TopologySettings | None = None) -> FamilyMap:
    def lift(points, t):
        values = curve.absolute_lift_at(t)
        return np.broadcast_to(values, (len(points),) + values.shape).copy()

    return FamilyMap(
        name=f"constant[{curve.metadata.get('family', 'curve')}]",
        domain=domain,
        evaluator=lambda p: curve,
        lift=lift,
        power=power,
        resolution=resolution or TopologySettings(),
    )


def h_hat_family(k: int, z: np.ndarray, cells: int = DEFAULT_CELLS,
                 resolution: TopologySettings | None = None) -> FamilyMap:
    return FamilyMap(
        name=f"h_hat[k={k}]",
        domain=Domain.DISK2_POWER,
        evaluator=lambda p: h_hat(k, z, np.reshape(p, (k - 1, 2)), cells),
        power=k - 1,
        resolution=resolution or TopologySettings(),
    )


# -- shared numerics ----------------------------------------------------------


def _jacobian(fn: Callable, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    columns = []
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        columns.append((fn(x + e) - fn(x - e)) / (2 * h))
    return np.stack(columns, axis=1)


def _newton(fn: Callable, x0: np.ndarray, tol: float, stall_tol: float,
            radius: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Damped Newton with a finite-difference Jacobian; returns (x, J(x))."""
    x = np.array(x0, dtype=float)
    fx = fn(x)
    norm = float(np.linalg.norm(fx))
    for _ in range(NEWTON_MAX_ITER):
        if norm < tol:
            break
        jac = _jacobian(fn, x)
        step = np.linalg.lstsq(jac, -fx, rcond=None)[0]
        lam = 1.0
        while lam > 1e-4:
            trial = x + lam * step
            f_trial = fn(trial)
            n_trial = float(np.linalg.norm(f_trial))
            if n_trial < norm:
                break
            lam /= 2
        else:
            break
        x, fx, norm = trial, f_trial, n_trial
        if radius is not None and np.linalg.norm(x) > radius:
            raise NoConvergence(f"Newton iterate left the chart (|x| = {np.linalg.norm(x):.3e})")
    if norm >= stall_tol:
        raise NoConvergence(f"Newton stalled at residual {norm:.3e}")
    if norm >= tol:
        logger.debug(f"Newton accepted at residual {norm:.3e}")
    return x, _jacobian(fn, x)


def _tangent_basis(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (e_a, e_b) at p with e_a x e_b = p."""
    helper = np.array([1.0, 0.0, 0.0]) if abs(p[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e_a = helper - (helper @ p) * p
    e_a /= np.linalg.norm(e_a)
    return e_a, np.cross(p, e_a)


def _sphere_chart(center: np.ndarray) -> Callable:
    e_a, e_b = _tangent_basis(center)

    def chart(x):
        x = np.asarray(x, dtype=float)
        p = center + x[..., 0, None] * e_a + x[..., 1, None] * e_b
        return p / np.linalg.norm(p, axis=-1, keepdims=True)

    return chart


def _periodic_gap(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


# -- degree -------------------------------------------------------------------


def _max_steps(lifts: np.ndarray) -> float:
    along_t = rot.chordal(np.roll(lifts, -1, axis=1), lifts)
    along_theta = rot.chordal(np.roll(lifts, -1, axis=0), lifts)
    return float(max(along_t.max(), along_theta.max()))


def _scan_sphere(g: FamilyMap, q_star: np.ndarray) -> list[tuple[float, int, int, int]]:
    """Grid local minima of |g~(p, t) - q*| as (distance, alpha, theta, t) indices."""
    res = g.resolution
    alphas = np.linspace(0.0, np.pi, res.sphere_alpha + 1)
    thetas = np.linspace(0.0, 2 * np.pi, res.sphere_theta, endpoint=False)
    ts = np.linspace(0.0, 1.0, res.circle_samples, endpoint=False)

    def row(i):
        lifts = g.lift_values(sphere_point(thetas, alphas[i]), ts)
        dist = rot.chordal(lifts, q_star)
        return lifts, dist, minimum_filter(dist, size=3, mode="wrap")

    candidates = []
    worst = 0.0
    previous = None
    current = row(0)
    for i in range(len(alphas)):
        following = row(i + 1) if i + 1 < len(alphas) else None
        lifts, dist, filtered = current
        worst = max(worst, _max_steps(lifts))
        if previous is not None:
            worst = max(worst, float(rot.chordal(lifts, previous[0]).max()))
        if worst > MAX_GRID_STEP:
            raise TooCoarse(
                f"lift moves {worst:.3f} between neighbouring grid samples of {g.name}; "
                f"increase the sphere or circle resolution"
            )
        neighbourhood = filtered
        for other in (previous, following):
            if other is not None:
                neighbourhood = np.minimum(neighbourhood, other[2])
        mask = (dist <= neighbourhood) & (dist < CANDIDATE_CEILING)
        if np.sin(alphas[i]) < 1e-12:
            mask[1:] = False
        for j, k in np.argwhere(mask):
            candidates.append((float(dist[j, k]), i, int(j), int(k)))
        previous, current = current, following
    logger.debug(f"{len(candidates)} degree candidates for {g.name} (max grid step {worst:.3f})")
    candidates.sort()
    return candidates


def _refine_preimage(g: FamilyMap, q_star: np.ndarray, center: np.ndarray, t_star: float) -> Preimage:
    res = g.resolution
    chart = _sphere_chart(center)
    q_inv = rot.conjugate(q_star)
    h_p = max(np.pi / res.sphere_alpha, 2 * np.pi / res.sphere_theta)
    h_t = 1.0 / res.circle_samples

    # local search on a grid `refine` times finer before Newton
    offsets = np.linspace(-h_p, h_p, res.refine + 1)
    aa, bb = np.meshgrid(offsets, offsets, indexing="ij")
    local = np.stack([aa.ravel(), bb.ravel()], axis=-1)
    dts = np.linspace(-h_t, h_t, res.refine + 1)
    dist = rot.chordal(g.lift_values(chart(local), np.mod(t_star + dts, 1.0)), q_star)
    m, n = np.unravel_index(int(np.argmin(dist)), dist.shape)
    x0 = np.array([local[m, 0], local[m, 1], dts[n]])

    def residual(x):
        q = g.lift_values(chart(x[:2])[None, :], np.array([np.mod(t_star + x[2], 1.0)]))[0, 0]
        return rot.multiply(q_inv, q)[1:]

    x, jac = _newton(residual, x0, NEWTON_TOL, NEWTON_STALL_TOL, radius=0.5)
    det = float(np.linalg.det(jac))
    point = chart(x[:2])
    t = float(np.mod(t_star + x[2], 1.0))
    if abs(det) < DET_TOL:
        raise NonTransversal(f"Jacobian determinant {det:.3e} at p = {np.round(point, 6)}, t = {t:.6f}")
    return Preimage(point, t, int(np.sign(det)))


def _degree_at(g: FamilyMap, q_star: np.ndarray) -> DegreeReport:
    alphas = np.linspace(0.0, np.pi, g.resolution.sphere_alpha + 1)
    thetas = np.linspace(0.0, 2 * np.pi, g.resolution.sphere_theta, endpoint=False)
    ts = np.linspace(0.0, 1.0, g.resolution.circle_samples, endpoint=False)

    found: list[Preimage] = []
    for _, i, j, k in _scan_sphere(g, q_star):
        center = sphere_point(thetas[j], alphas[i])
        if any(rot.chordal(center, pre.point) < DEDUP_TOL and _periodic_gap(ts[k], pre.t) < DEDUP_TOL
               for pre in found):
            continue
        try:
            pre = _refine_preimage(g, q_star, center, float(ts[k]))
        except NoConvergence as e:
            logger.debug(f"discarding candidate at alpha={alphas[i]:.4f}, theta={thetas[j]:.4f}: {e}")
            continue
        if any(rot.chordal(pre.point, other.point) < DEDUP_TOL and _periodic_gap(pre.t, other.t) < DEDUP_TOL
               for other in found):
            continue
        found.append(pre)
    found.sort(key=lambda pre: (pre.point[2], pre.t))
    return DegreeReport(sum(pre.sign for pre in found), tuple(found), q_star)


def degree(g: FamilyMap, regular_values=None) -> DegreeReport:
    """
    Degree of g~: S^2 x S^1 -> S^3, (p, t) -> lifted frame of g(p) at t, as a
    signed count of preimages of a regular value. Falls back through the
    list of regular values when transversality fails.
    """
    if g.domain is not Domain.SPHERE2:
        raise ValueError(f"degree needs a family over the sphere, got {g.domain.value}")
    values = REGULAR_VALUES if regular_values is None else [rot.normalize(q) for q in regular_values]
    last_error = None
    for q_star in values:
        try:
            report = _degree_at(g, q_star)
        except NonTransversal as e:
            logger.info(f"regular value {np.round(q_star, 4)} rejected for {g.name}: {e}")
            last_error = e
            continue
        logger.info(f"degree of {g.name} is {report.value} ({len(report.preimages)} preimages)")
        return report
    raise last_error


# -- winding and M_k intersections --------------------------------------------


def winding_number(loop) -> int:
    """Winding number about the origin of a closed loop sampled in the plane."""
    loop = np.asarray(loop, dtype=float)
    if loop.ndim != 2 or loop.shape[1] != 2 or len(loop) < 3:
        raise ValueError("loop must be an (m, 2) array with m >= 3")
    if np.min(np.linalg.norm(loop, axis=1)) < 1e-12:
        raise NonTransversal("loop passes through the origin")
    angles = np.arctan2(loop[:, 1], loop[:, 0])
    turns = np.mod(np.diff(np.append(angles, angles[0])) + np.pi, 2 * np.pi) - np.pi
    widest = float(np.max(np.abs(turns)))
    if widest > np.pi / 2:
        raise TooCoarse(f"a loop segment subtends {widest:.3f} rad")
    return int(np.rint(turns.sum() / (2 * np.pi)))


def _mk_scan_points(g: FamilyMap) -> tuple[list[np.ndarray], float]:
    res = g.resolution
    if g.domain is Domain.SPHERE2:
        n_alpha = max(res.sphere_alpha // MK_SCAN_COARSENING, 4)
        n_theta = max(res.sphere_theta // MK_SCAN_COARSENING, 8)
        points = [sphere_point(0.0, 0.0)]
        for alpha in np.linspace(0.0, np.pi, n_alpha + 1)[1:-1]:
            points.extend(sphere_point(np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False), alpha))
        points.append(sphere_point(0.0, np.pi))
        return points, max(np.pi / n_alpha, 2 * np.pi / n_theta)
    if g.domain is Domain.DISK2_POWER:
        side = np.linspace(-1.0, 1.0, max(res.disk_grid // 4, 3))
        disk = [np.array([x, y]) for x in side for y in side if x * x + y * y <= 1.0 + 1e-12]
        points = [np.stack(combo) for combo in itertools.product(disk, repeat=g.power)]
        return points, float(side[1] - side[0])
    raise ValueError("M_k intersections need a family over the sphere or a power of the disk")


def _domain_chart(g: FamilyMap, center: np.ndarray) -> Callable:
    if g.domain is Domain.SPHERE2:
        return _sphere_chart(center)
    return lambda x: center + np.reshape(x, center.shape)


def _mk_at(g: FamilyMap, point: np.ndarray, k: int) -> np.ndarray:
    return mk_coordinates(g.evaluator(point), k)


def _local_degree(g: FamilyMap, chart: Callable, x: np.ndarray, jac: np.ndarray, k: int) -> int:
    if k == 2:
        radius = np.tan(ZERO_LOOP_RADIUS) if g.domain is Domain.SPHERE2 else ZERO_LOOP_RADIUS
        phis = np.linspace(0.0, 2 * np.pi, ZERO_LOOP_SAMPLES, endpoint=False)
        loop = []
        for phi in phis:
            offset = x + radius * np.array([np.cos(phi), np.sin(phi)])
            try:
                loop.append(_mk_at(g, chart(offset), k))
            except NotInUk as e:
                raise NonTransversal(f"M_2 undefined on the loop around the zero: {e}") from e
        return winding_number(np.array(loop))
    det = float(np.linalg.det(jac))
    if abs(det) < DET_TOL:
        raise NonTransversal(f"M_{k} Jacobian determinant {det:.3e}")
    return int(np.sign(det))


def count_mk_intersections(g: FamilyMap, k: int) -> IntersectionReport:
    """
    m_{2k-2}(g): zeros of M_k along the family, each counted with its local
    degree (winding number for k = 2, Jacobian sign otherwise).
    """
    if g.dimension != 2 * k - 2:
        raise ValueError(f"family {g.name} has dimension {g.dimension}, M_{k} needs {2 * k - 2}")
    points, spacing = _mk_scan_points(g)

    candidates = []
    unresolved = []
    for point in points:
        try:
            value = _mk_at(g, point, k)
        except NotInUk as e:
            if e.reason != "crossings":
                report = multiconvex_multiplicity(g.evaluator(point))
                if report.multiplicity == k:
                    logger.warning(f"{g.name}: multiconvex curve outside the M_{k} chart ({e.reason})")
                    unresolved.append(point)
            continue
        size = float(np.linalg.norm(value))
        if size < MK_CANDIDATE:
            candidates.append((size, point))
    candidates.sort(key=lambda item: item[0])

    accepted = []
    for size, point in candidates:
        if any(np.linalg.norm(point - other) < 2 * spacing for other in accepted):
            continue
        accepted.append(point)

    zeros: list[MkZero] = []
    for center in accepted:
        chart = _domain_chart(g, center)

        def residual(x, chart=chart):
            return _mk_at(g, chart(x), k)

        try:
            x, jac = _newton(residual, np.zeros(2 * k - 2), MK_REFINE_TOL, MK_STALL_TOL, radius=4 * spacing)
        except (NoConvergence, NotInUk) as e:
            logger.debug(f"discarding M_{k} candidate near {np.round(center, 4)}: {e}")
            continue
        except (ConvexaError, ValueError) as e:
            logger.warning(f"could not refine M_{k} candidate near {np.round(center, 4)}: {e}")
            continue
        location = chart(x)
        if any(np.linalg.norm(location - z.point) < DEDUP_TOL for z in zeros):
            continue
        zeros.append(MkZero(location, _local_degree(g, chart, x, jac, k)))

    value = sum(z.local_degree for z in zeros)
    logger.info(f"m_{2 * k - 2}({g.name}) = {value} from {len(zeros)} zeros")
    return IntersectionReport(value, k, tuple(zeros), tuple(unresolved))


# -- components -----------------------------------------------------------------


def classify_component(curve: FramedCurve, tol: float = ENDPOINT_TOL) -> Component:
    """Connected component of a curve with endpoint lift +1 or -1."""
    z = curve.endpoint_lift
    if rot.chordal(z, rot.ONE) < tol:
        return Component.POS
    if rot.chordal(z, -rot.ONE) < tol:
        if multiconvex_multiplicity(curve).multiplicity == 1:
            return Component.NEG_CONVEX
        return Component.NEG_NONCONVEX
    raise WrongEndpoint(f"endpoint lift {np.round(z, 6)} is neither 1 nor -1")
