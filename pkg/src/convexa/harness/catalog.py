"""
Named curve families with string parameters, shared by the command line and
the console.
"""
import logging
from typing import Callable

import numpy as np

from convexa.config.loader import Settings
from convexa.geometry import rotations as rot
from convexa.geometry.curves import FramedCurve
from convexa.geometry.families import beta, circle, gamma_alpha, g0, gs, h_hat, nu, path_nu, sphere_point

logger = logging.getLogger(__name__)


def parse_params(items) -> dict[str, str]:
    """['k=v', ...] -> {'k': 'v'}."""
    params = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"expected key=value, got '{item}'")
        params[key.strip()] = value.strip()
    return params


def _float(params: dict, key: str, default: float) -> float:
    raw = params.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"parameter {key} must be a number, got '{raw}'") from None


def _int(params: dict, key: str, default: int) -> int:
    raw = params.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"parameter {key} must be an integer, got '{raw}'") from None


def _numbers(params: dict, key: str, default) -> np.ndarray:
    raw = params.get(key)
    if raw is None:
        return np.asarray(default, dtype=float)
    try:
        return np.array([float(x) for x in raw.split(",")])
    except ValueError:
        raise ValueError(f"parameter {key} must be a comma separated list of numbers") from None


def _sphere(params: dict) -> np.ndarray:
    return sphere_point(_float(params, "theta", 0.0), _float(params, "alpha", 0.0))


def _h_hat(params: dict, cells: int) -> FramedCurve:
    k = _int(params, "k", 2)
    z = rot.normalize(_numbers(params, "z", rot.ONE))
    if z.shape != (4,):
        raise ValueError("z needs four components w,x,y,z")
    points = _numbers(params, "p", np.zeros(2 * (k - 1)))
    if points.size != 2 * (k - 1):
        raise ValueError(f"p needs {2 * (k - 1)} coordinates for k = {k}")
    return h_hat(k, z, points.reshape(k - 1, 2), cells)


FAMILY_BUILDERS: dict[str, Callable[[dict, int], FramedCurve]] = {
    "nu": lambda params, cells: nu(_float(params, "s", 1.0), cells),
    "circle": lambda params, cells: circle(np.eye(3), _float(params, "rho", np.pi / 4), cells),
    "beta": lambda params, cells: beta(_float(params, "alpha", 0.0), cells),
    "gamma": lambda params, cells: gamma_alpha(_float(params, "alpha", 0.0), cells),
    "g0": lambda params, cells: g0(_sphere(params), cells),
    "gs": lambda params, cells: gs(_float(params, "s", 0.25), _sphere(params), cells),
    "path-nu": lambda params, cells: path_nu(_int(params, "n", 2), _float(params, "sigma", 0.5), cells),
    "h-hat": _h_hat,
}


def family_names() -> list[str]:
    return list(FAMILY_BUILDERS)


def build_family(name: str, params: dict, settings: Settings) -> FramedCurve:
    if name not in FAMILY_BUILDERS:
        raise KeyError(f"unknown family '{name}'; available: {', '.join(FAMILY_BUILDERS)}")
    logger.info(f"building family {name} with {params}")
    return FAMILY_BUILDERS[name](params, settings.numerics.grid_cells)
