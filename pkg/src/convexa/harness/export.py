"""
CSV exports for plotting: curve samples, relative-frame minor traces and
M_k traces along a loop of a family.
"""
import csv
import logging
from pathlib import Path

import numpy as np

from convexa.errors import NotInUk
from convexa.geometry import bruhat
from convexa.geometry.convexity import mk_coordinates
from convexa.geometry.curves import FramedCurve
from convexa.geometry.families import sphere_point
from convexa.harness.topology import FamilyMap

logger = logging.getLogger(__name__)

SAMPLE_FIELDS = ["t", "x", "y", "z", "qw", "qx", "qy", "qz", "v", "v_hat"]
MINOR_FIELDS = ["t", "mu1", "mu2", "open_code"]


def _write_rows(path, fieldnames: list[str], rows: list[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    logger.info(f"wrote {len(rows)} rows to {path}")
    return path


def sample_rows(curve: FramedCurve, samples: int | None = None) -> list[dict]:
    """
    The point, the absolute lift and the speeds: one row per grid point of the
    curve, or samples + 1 rows at uniform times when samples is given.
    """
    if samples is None:
        ts, v, v_hat = curve.grid, curve.v, curve.v_hat
    else:
        if samples < 1:
            raise ValueError("samples must be positive")
        ts = np.linspace(0.0, 1.0, samples + 1)
        cells = curve.cell_index(ts)
        v, v_hat = curve.v[cells], curve.v_hat[cells]
    points = curve.point_at(ts)
    lifts = curve.absolute_lift_at(ts)
    rows = []
    for i, t in enumerate(ts):
        values = [t, *points[i], *lifts[i], v[i], v_hat[i]]
        rows.append({name: repr(float(x)) for name, x in zip(SAMPLE_FIELDS, values)})
    return rows


def export_samples(curve: FramedCurve, path, samples: int | None = None) -> Path:
    return _write_rows(path, SAMPLE_FIELDS, sample_rows(curve, samples))


def minor_rows(curve: FramedCurve, t0: float, samples: int = 512) -> list[dict]:
    """mu1 = Q31 and mu2 = Q21 Q32 - Q22 Q31 of the relative frame Gamma(t0; t), t in (t0, 1]."""
    ts = np.linspace(t0, 1.0, samples + 1)[1:]
    frames = curve.relative_frame(t0, ts)
    mu1, mu2 = bruhat.open_cell_minors(frames)
    rows = []
    for t, a, b, frame in zip(ts, mu1, mu2, frames):
        code = bruhat.open_cell_code(frame)
        rows.append({
            "t": repr(float(t)),
            "mu1": repr(float(a)),
            "mu2": repr(float(b)),
            "open_code": "" if code is None else str(code),
        })
    return rows


def export_minor_trace(curve: FramedCurve, t0: float, path, samples: int = 512) -> Path:
    return _write_rows(path, MINOR_FIELDS, minor_rows(curve, t0, samples))


def mk_rows(family: FamilyMap, k: int, points, params) -> tuple[list[str], list[dict]]:
    """M_k along a path of domain points; cells stay empty where the curve leaves U_k."""
    names = [f"{axis}{j}" for j in range(1, k) for axis in ("theta", "eta")]
    rows = []
    for param, point in zip(params, points):
        row = {"param": repr(float(param)), "reason": ""}
        try:
            coords = mk_coordinates(family.evaluator(point), k)
            row.update({name: repr(float(x)) for name, x in zip(names, coords)})
        except NotInUk as e:
            row.update({name: "" for name in names})
            row["reason"] = e.reason
        rows.append(row)
    return ["param", *names, "reason"], rows


def polar_loop(alpha: float, samples: int) -> tuple[np.ndarray, np.ndarray]:
    """Points of the circle of polar angle alpha around the south pole."""
    phis = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    return phis, sphere_point(phis, alpha)


def export_mk_trace(family: FamilyMap, k: int, path, alpha: float = 0.05, samples: int = 64) -> Path:
    phis, points = polar_loop(alpha, samples)
    fieldnames, rows = mk_rows(family, k, points, phis)
    return _write_rows(path, fieldnames, rows)
