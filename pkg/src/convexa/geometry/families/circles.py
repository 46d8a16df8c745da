"""Circles: the standard family nu_s and circles of arbitrary radius."""
import logging

import numpy as np

from convexa.geometry import rotations as rot
from convexa.geometry.curves import DEFAULT_CELLS, FramedCurve, nu1_lift

logger = logging.getLogger(__name__)

# lifted frames per cell for the nu_s family
_CELLS_PER_TURN = 64


def _cells_for(s: float, cells: int) -> int:
    return max(cells, int(np.ceil(abs(s) * _CELLS_PER_TURN)))


def nu(s: float, cells: int = DEFAULT_CELLS) -> FramedCurve:
    """nu_s(t) = nu_1(s t), lift exp(pi s t k_hat)."""
    if s <= 0:
        raise ValueError(f"nu_s needs s > 0, got {s}")
    return nu_segment(0.0, s, cells).with_metadata(family="nu", s=float(s))


def nu_segment(x0: float, x1: float, cells: int = DEFAULT_CELLS) -> FramedCurve:
    """The arc of nu_1 on [x0, x1], rescaled to [0, 1] and based at nu_1(x0)."""
    if x1 <= x0:
        raise ValueError("nu_segment needs x0 < x1")
    length = x1 - x0
    cells = _cells_for(length, cells)
    grid = np.linspace(0.0, 1.0, cells + 1)
    lifts = nu1_lift(length * grid)
    speed = np.full(cells + 1, rot.SQRT2 * np.pi * length)
    return FramedCurve(grid, lifts, speed, speed.copy(), nu1_lift(x0))


def circle(basis: np.ndarray, rho: float, cells: int = DEFAULT_CELLS) -> FramedCurve:
    """
    gamma(t) = cos(2 pi t) sin(rho) v1 + sin(2 pi t) sin(rho) v2 + cos(rho) v3,
    the circle of radius rho about v3 travelled once, with curvature cot(rho).
    """
    if not 0.0 < rho < np.pi / 2:
        raise ValueError(f"radius must lie in (0, pi/2), got {rho}")
    basis = np.asarray(basis, dtype=float)
    base = rot.multiply(
        rot.rotation_to_quaternion(basis),
        rot.exp_im(np.array([0.0, (rho - np.pi / 2) / 2, 0.0])),
    )
    axis = np.array([np.cos(rho), 0.0, np.sin(rho)])
    grid = np.linspace(0.0, 1.0, cells + 1)
    lifts = rot.exp_im(np.pi * grid[:, None] * axis)
    v = np.full(cells + 1, 2 * np.pi * np.sin(rho))
    v_hat = np.full(cells + 1, 2 * np.pi * np.cos(rho))
    return FramedCurve(grid, lifts, v, v_hat, base, {"family": "circle", "rho": float(rho)})


def nu1_circle_basis() -> np.ndarray:
    """The basis for which circle(basis, pi/4) is nu_1."""
    return rot.rot_y(np.pi / 4)


def equator(turns: float = 1.0, cells: int = DEFAULT_CELLS) -> FramedCurve:
    """The equator z = 0 travelled `turns` times: an immersion with zero curvature."""
    grid = np.linspace(0.0, 1.0, _cells_for(2 * turns, cells) + 1)
    lifts = rot.exp_im(np.pi * turns * grid[:, None] * np.array([0.0, 0.0, 1.0]))
    v = np.full(len(grid), 2 * np.pi * turns)
    return FramedCurve(grid, lifts, v, np.zeros(len(grid)), metadata={"family": "equator"})
