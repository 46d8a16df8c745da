"""
The reproduction checks run by the suite.

Each check takes the settings and its own random generator and returns a
CheckResult; details hold only JSON values so that reports are reproducible.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from convexa.config.loader import Settings
from convexa.errors import ConvexaError, NearBoundary, NotGraftable
from convexa.geometry import bruhat
from convexa.geometry import rotations as rot
from convexa.geometry.convexity import is_stably_convex_arc, multiconvex_multiplicity
from convexa.geometry.curves import (
    EllipseArc,
    ellipse_curve,
    eval_ellipse,
    geodesic_curvature,
    integrate_speeds,
    nu1_lift,
    total_curvature,
    transform,
)
from convexa.geometry.deform import (
    GraftSpec,
    LoopSpec,
    add_loops,
    find_graft_window,
    graft,
    graft_matrix,
    graft_normalized,
    spread_loops_search,
)
from convexa.geometry.families import (
    NORTH,
    SOUTH,
    circle,
    find_eps0,
    fit_ellipse,
    g0,
    gamma_alpha,
    h_hat,
    hexarc_lift,
    nu,
    osculating_ellipse,
    sphere_point,
)
from convexa.harness.topology import (
    count_mk_intersections,
    degree,
    g0_family,
    h_hat_family,
    looped_family,
)

logger = logging.getLogger(__name__)

LOCATION_TOL = 1e-3
NO_TANGENT_GRID = 200
NO_TANGENT_BAND = 0.01
NO_TANGENT_FLOOR = 1e-6
# beyond this band the distance is bounded below by NO_TANGENT_MIN
NO_TANGENT_FAR_BAND = 1.0 / 16
NO_TANGENT_MIN = 0.01
ELLIPSE_NOISE = 1e-3
ELLIPSE_DRIFT_MAX = 3e-2
LOOP_TIME = 0.9


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    summary: str
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "summary": self.summary, "details": self.details}


def _num(x: float) -> float:
    return float(f"{float(x):.12g}")


def _vec(x) -> list[float]:
    return [_num(v) for v in np.ravel(x)]


def _result(name: str, passed: bool, summary: str, **details) -> CheckResult:
    return CheckResult(name, "pass" if passed else "fail", summary, details)


def _random_upper(rng: np.random.Generator) -> np.ndarray:
    u = np.triu(rng.standard_normal((3, 3)), 1)
    return u + np.diag(np.exp(0.5 * rng.standard_normal(3)))


# -- bruhat ---------------------------------------------------------------------


def check_bruhat_oracle(settings: Settings, rng: np.random.Generator) -> CheckResult:
    """normal_form recovers P from pi(U0 P U1) for random upper triangular U0, U1."""
    n = settings.suite.oracle_samples
    skipped = mismatches = 0
    for _ in range(n):
        perm = bruhat.B3_PLUS[int(rng.integers(len(bruhat.B3_PLUS)))]
        q = rot.gram_schmidt(_random_upper(rng) @ perm.matrix @ _random_upper(rng))
        try:
            found = bruhat.normal_form(q, settings.numerics.zero_tol).perm
        except NearBoundary:
            skipped += 1
            continue
        if found != perm:
            mismatches += 1
    return _result(
        "bruhat-oracle", mismatches == 0,
        f"{n - skipped - mismatches}/{n - skipped} recovered ({skipped} near the boundary)",
        samples=n, skipped=skipped, mismatches=mismatches,
    )


def check_minor_predicate(settings: Settings, rng: np.random.Generator) -> CheckResult:
    """The two-minor test for the open cell agrees with the normal form."""
    n = settings.suite.oracle_samples
    frames = rot.random_rotations(rng, n)
    predicted = bruhat.is_open_convex(frames, settings.suite.minor_sign)
    skipped = disagreements = 0
    for frame, guess in zip(frames, predicted):
        try:
            name = bruhat.normal_form(frame, settings.numerics.zero_tol).perm.name
        except NearBoundary:
            skipped += 1
            continue
        if (name == bruhat.OPEN_CELL) != bool(guess):
            disagreements += 1
    return _result(
        "minor-predicate", disagreements == 0,
        f"{disagreements} disagreements over {n - skipped} rotations",
        samples=n, skipped=skipped, disagreements=disagreements,
        minor_sign=settings.suite.minor_sign,
    )


# -- families -------------------------------------------------------------------


def check_total_curvature(settings: Settings, rng: np.random.Generator) -> CheckResult:
    cells = settings.numerics.grid_cells
    errors = {}
    for s in (0.5, 1.0, 2.0, 4.0):
        errors[f"nu({s:g})"] = abs(total_curvature(nu(s, cells)) - 2 * np.pi * s)
    for label, rho in (("pi/6", np.pi / 6), ("pi/4", np.pi / 4), ("pi/3", np.pi / 3)):
        errors[f"circle({label})"] = abs(total_curvature(circle(np.eye(3), rho, cells)) - 2 * np.pi)
    worst = max(errors.values())
    return _result(
        "total-curvature", worst < 1e-6, f"largest deviation {worst:.2e}",
        errors={k: _num(v) for k, v in errors.items()},
    )


def check_gamma_family(settings: Settings, rng: np.random.Generator) -> CheckResult:
    cells = settings.numerics.grid_cells
    low, high = 2 - np.sqrt(3) - 1e-7, 2 + np.sqrt(3) + 1e-7
    alphas = np.linspace(0.0, np.pi, 64)
    tots = []
    kappa_ok = True
    for alpha in alphas:
        curve = gamma_alpha(float(alpha), cells)
        kappa = geodesic_curvature(curve)
        kappa_ok &= bool(np.all((kappa >= low) & (kappa <= high)))
        tots.append(total_curvature(curve))
    tots = np.array(tots)
    ends_ok = abs(tots[0] - 4 * np.pi) < 1e-4 and abs(tots[-1] - 8 * np.pi) < 1e-4
    increasing = bool(np.all(np.diff(tots) > 0))
    return _result(
        "gamma-family", kappa_ok and ends_ok and increasing,
        f"tot from {tots[0]:.6f} to {tots[-1]:.6f}, curvature bounds {'held' if kappa_ok else 'violated'}",
        tot_start=_num(tots[0]), tot_end=_num(tots[-1]), increasing=increasing, kappa_in_bounds=kappa_ok,
    )


def check_no_common_tangent(settings: Settings, rng: np.random.Generator) -> CheckResult:
    """
    Away from the diagonal B~_alpha(t0; t1) stays off the circle through k:
    strictly off it outside a thin band, and by NO_TANGENT_MIN outside a wide one.
    """
    ts = np.linspace(0.0, 1.0, NO_TANGENT_GRID, endpoint=False)
    gap = np.abs(ts[:, None] - ts[None, :]) % 1.0
    band = np.minimum(gap, 1.0 - gap)
    off_diagonal = band > NO_TANGENT_BAND
    far = band >= NO_TANGENT_FAR_BAND
    minima, far_minima = {}, {}
    for label, alpha in (("pi/4", np.pi / 4), ("pi/2", np.pi / 2), ("3pi/4", 3 * np.pi / 4)):
        lifts = hexarc_lift(alpha, ts)
        relative = rot.multiply(rot.conjugate(lifts)[:, None, :], lifts[None, :, :])
        dist = rot.dist_to_circle(relative, np.array([0.0, 0.0, 1.0]))
        minima[label] = float(dist[off_diagonal].min())
        far_minima[label] = float(dist[far].min())
    worst = min(minima.values())
    worst_far = min(far_minima.values())
    return _result(
        "no-common-tangent", worst > NO_TANGENT_FLOOR and worst_far > NO_TANGENT_MIN,
        f"closest approach {worst:.4f} (band {NO_TANGENT_BAND:g}), {worst_far:.4f} (band {NO_TANGENT_FAR_BAND:g})",
        minima={k: _num(v) for k, v in minima.items()},
        far_minima={k: _num(v) for k, v in far_minima.items()},
    )


def check_ellipse_fit(settings: Settings, rng: np.random.Generator) -> CheckResult:
    # exact and perturbed data from a random projective image of a half turn of nu_1
    m = np.eye(3) + 0.2 * rng.standard_normal((3, 3))
    if np.linalg.det(m) < 0:
        m[:, 0] = -m[:, 0]
    arc = EllipseArc(m, 0.0, 0.5)
    curve = ellipse_curve(arc, 256)
    z0 = curve.base
    z1 = rot.multiply(curve.base, curve.endpoint_lift)
    t = 0.3
    point, _ = eval_ellipse(arc, t)
    fitted = fit_ellipse(z0, point, t, z1)
    sample_times = np.linspace(0.0, 1.0, 33)
    exact_error = float(np.max(np.abs(eval_ellipse(fitted, sample_times)[0] - eval_ellipse(arc, sample_times)[0])))

    # every input moved by ELLIPSE_NOISE; the fitted arc moves by the same order
    perturbed_fit = fit_ellipse(
        rot.normalize(z0 + ELLIPSE_NOISE * rng.standard_normal(4)),
        point + ELLIPSE_NOISE * rng.standard_normal(3),
        t + ELLIPSE_NOISE * rng.uniform(-1.0, 1.0),
        rot.normalize(z1 + ELLIPSE_NOISE * rng.standard_normal(4)),
    )
    drift = float(np.max(np.abs(eval_ellipse(perturbed_fit, sample_times)[0] - eval_ellipse(arc, sample_times)[0])))

    osculating_failures = 0
    targets = 0
    while targets < 100:
        frame = rot.random_rotations(rng, 1)[0]
        if not bruhat.is_open_convex(frame):
            continue
        targets += 1
        try:
            osc = osculating_ellipse(frame)
            osc_curve = ellipse_curve(osc, 128)
            ok = osc.residual < 1e-8 and is_stably_convex_arc(osc_curve, 0.0, 1.0)
        except ConvexaError as e:
            logger.debug(f"osculating ellipse failed: {e}")
            ok = False
        osculating_failures += 0 if ok else 1

    passed = (
        fitted.residual < 1e-10 and exact_error < 1e-10
        and perturbed_fit.residual < 1e-8 and drift < ELLIPSE_DRIFT_MAX and osculating_failures == 0
    )
    return _result(
        "ellipse-fit", passed,
        f"exact residual {fitted.residual:.1e}, perturbed {perturbed_fit.residual:.1e} (drift {drift:.1e}), "
        f"{osculating_failures} osculating failures",
        exact_residual=_num(fitted.residual), exact_error=_num(exact_error),
        perturbed_residual=_num(perturbed_fit.residual), perturbed_drift=_num(drift),
        osculating_failures=osculating_failures,
    )


# -- multiconvexity ---------------------------------------------------------------


def check_multiconvex(settings: Settings, rng: np.random.Generator) -> CheckResult:
    cells = settings.numerics.grid_cells
    multiplicities = {k: multiconvex_multiplicity(nu(k, cells)).multiplicity for k in range(1, 6)}
    nu_ok = all(multiplicities[k] == k for k in multiplicities)

    rows = 12
    spacing = np.pi / rows
    members = []
    away_from_poles = 0
    points = [(0.0, 0.0), (0.0, np.pi)]
    for alpha in np.linspace(0.0, np.pi, rows + 1)[1:-1]:
        points.extend((theta, alpha) for theta in np.linspace(0.0, 2 * np.pi, 12, endpoint=False))
    for theta, alpha in points:
        curve = g0(sphere_point(theta, alpha), cells)
        k = multiconvex_multiplicity(curve).multiplicity
        if k is None:
            continue
        tot = total_curvature(curve)
        members.append({"alpha": _num(alpha), "theta": _num(theta), "k": k, "tot": _num(tot)})
        if spacing <= alpha <= np.pi - spacing:
            away_from_poles += 1
    tot_ok = all(2 * (m["k"] - 1) * np.pi < m["tot"] < 4 * m["k"] * np.pi for m in members)
    return _result(
        "multiconvex", nu_ok and away_from_poles == 0 and tot_ok,
        f"nu_k multiplicities {list(multiplicities.values())}, {len(members)} multiconvex g0 samples",
        nu_multiplicities=[multiplicities[k] for k in sorted(multiplicities)],
        g0_members=members, away_from_poles=away_from_poles,
    )


# -- topology ---------------------------------------------------------------------


def _preimage_dict(pre) -> dict:
    return {"point": _vec(pre.point), "t": _num(pre.t), "sign": pre.sign}


def _expected_preimages(report) -> bool:
    expected = [(SOUTH, 0.5), (NORTH, 0.25), (NORTH, 0.75)]
    if len(report.preimages) != 3:
        return False
    for pre, (point, t) in zip(report.preimages, expected):
        if np.linalg.norm(pre.point - point) > LOCATION_TOL or abs(pre.t - t) > LOCATION_TOL:
            return False
    first, second, third = (pre.sign for pre in report.preimages)
    return first != second and second == third


def check_degree_g0(settings: Settings, rng: np.random.Generator) -> CheckResult:
    family = g0_family(settings.numerics.grid_cells, settings.topology)
    report = degree(family)
    located = _expected_preimages(report)
    return _result(
        "degree-g0", abs(report.value) == 1 and located,
        f"N(g0) = {report.value} with {len(report.preimages)} preimages",
        value=report.value, regular_value=_vec(report.regular_value),
        preimages=[_preimage_dict(pre) for pre in report.preimages],
    )


def check_mk_intersections(settings: Settings, rng: np.random.Generator) -> CheckResult:
    family = g0_family(settings.numerics.grid_cells, settings.topology)
    looped = looped_family(family, LoopSpec(LOOP_TIME, 2))
    m2 = count_mk_intersections(family, 2)
    m2_looped = count_mk_intersections(looped, 2)
    n_plain = degree(family).value
    n_looped = degree(looped).value

    at_south = len(m2.zeros) == 1 and np.linalg.norm(m2.zeros[0].point - SOUTH) < LOCATION_TOL
    passed = abs(m2.value) == 1 and at_south and m2_looped.value == 0 and n_plain == n_looped
    return _result(
        "mk-intersections", passed,
        f"m2(g0) = {m2.value}, m2(g0 with loops) = {m2_looped.value}, N = {n_plain} / {n_looped}",
        m2=m2.value, m2_looped=m2_looped.value, degree=n_plain, degree_looped=n_looped,
        zeros=[{"point": _vec(z.point), "local_degree": z.local_degree} for z in m2.zeros],
    )


def check_h_hat(settings: Settings, rng: np.random.Generator) -> CheckResult:
    """k = 2, z = 1: one M_2 zero at the centre and the frame z0 at t = 1/2 everywhere."""
    cells = settings.numerics.grid_cells
    z = rot.ONE
    family = h_hat_family(2, z, cells, settings.topology)
    m2 = count_mk_intersections(family, 2)
    centred = len(m2.zeros) == 1 and np.linalg.norm(m2.zeros[0].point) < LOCATION_TOL

    z0 = -nu1_lift(find_eps0(2, z))
    side = np.linspace(-1.0, 1.0, settings.topology.disk_grid)
    worst = 0.0
    for x in side:
        for y in side:
            if x * x + y * y > 1.0:
                continue
            curve = h_hat(2, z, np.array([[x, y]]), cells)
            worst = max(worst, float(rot.chordal(curve.absolute_lift_at(0.5), z0)))
    return _result(
        "h-hat", abs(m2.value) == 1 and centred and worst < 1e-7,
        f"m2 = {m2.value}, frame condition error {worst:.1e}",
        m2=m2.value, zeros=[_vec(zero.point) for zero in m2.zeros], frame_error=_num(worst),
    )


# -- surgeries ----------------------------------------------------------------------


def _immersed_test_curve(cells: int):
    return integrate_speeds(
        lambda t: np.full_like(t, 2 * np.pi),
        lambda t: 2 * np.pi * (0.3 + np.cos(4 * np.pi * t)),
        cells,
    )


def _graftable(curve):
    for t0 in (0.05, 0.1, 0.15, 0.2, 0.3):
        try:
            return find_graft_window(curve, t0)
        except NotGraftable as e:
            logger.debug(f"no graft window from {t0}: {e}")
    raise NotGraftable("no graft window on the test curve")


def check_surgeries(settings: Settings, rng: np.random.Generator) -> CheckResult:
    cells = settings.numerics.grid_cells
    details = {}

    base = gamma_alpha(0.7, cells)
    parity_ok = tot_ok = True
    for n in (1, 2, 3):
        looped = add_loops(base, LoopSpec(0.4, n))
        parity_ok &= bool(rot.chordal(looped.endpoint_lift, (-1.0) ** n * base.endpoint_lift) < 1e-9)
        tot_ok &= bool(abs(total_curvature(looped) - total_curvature(base) - 2 * np.pi * n) < 1e-6)
    details["add_loops"] = {"parity": parity_ok, "tot_increment": tot_ok}

    curve = g0(sphere_point(0.3, np.pi / 2), cells)
    window = _graftable(curve)
    eps = (window.t1 - window.t0) / 16
    spec = GraftSpec(window.t0, window.t1, 1.0, window.ell, eps)
    grafted = graft(curve, spec)
    outside = curve.grid[(curve.grid < spec.t0) | (curve.grid > spec.t1)]
    unchanged = float(np.max(rot.chordal(grafted.absolute_lift_at(outside), curve.absolute_lift_at(outside))))

    sample_times = np.linspace(0.0, 1.0, 513)
    near = [graft(curve, GraftSpec(spec.t0, spec.t1, s, spec.ell, eps)).absolute_lift_at(sample_times)
            for s in (0.5, 0.5 + 1e-4)]
    jump = float(np.max(rot.chordal(near[0], near[1])))

    normalized = transform(graft_matrix(curve, spec.t0, spec.t1, spec.ell), curve)
    increment = total_curvature(graft_normalized(normalized, spec.t0, spec.t1, 1.0, eps)) - total_curvature(normalized)
    graft_ok = (
        unchanged < 1e-9 and grafted.is_locally_convex
        and jump < 1e-2 and abs(increment - 4 * np.pi) < 1e-5
    )
    details["graft"] = {
        "t0": _num(spec.t0), "t1": _num(spec.t1), "cell": spec.ell,
        "outside_change": _num(unchanged), "locally_convex": grafted.is_locally_convex,
        "continuity_jump": _num(jump), "tot_increment": _num(increment),
    }

    immersed = _immersed_test_curve(cells)
    n, spread = spread_loops_search(immersed, 2, settings.families.spread_search_max)
    spread_ok = (not immersed.is_locally_convex) and spread.is_locally_convex
    details["spread_loops"] = {"n": n, "locally_convex": spread.is_locally_convex}

    passed = parity_ok and tot_ok and graft_ok and spread_ok
    return _result(
        "surgeries", passed,
        f"add_loops {'ok' if parity_ok and tot_ok else 'failed'}, graft {'ok' if graft_ok else 'failed'}, "
        f"spread_loops n = {n}",
        **details,
    )
