"""
The hexagonal arcs B_alpha, the convex curves gamma_alpha and the map g0.

B_alpha is closed form on six windows of length 1/6 centred at m/6:
  even m: exp(2 pi (m/2) k / 3) W_alpha(t - m/6)
  odd m:  -exp(2 pi ((m - 3)/2) k / 3) W_{-alpha}(t - m/6)
with W_alpha(s) = exp(alpha j / 2) exp(u(alpha) s k) exp(v(alpha) j).
"""
import logging
from dataclasses import dataclass

import numpy as np

from convexa.geometry import rotations as rot
from convexa.geometry.curves import DEFAULT_CELLS, FramedCurve, splice
from convexa.geometry.families.circles import nu

logger = logging.getLogger(__name__)

_J = np.array([0.0, 1.0, 0.0])
_K = np.array([0.0, 0.0, 1.0])
SOUTH = np.array([0.0, 0.0, -1.0])
NORTH = np.array([0.0, 0.0, 1.0])


def alpha_tilde(alpha):
    return np.arcsin(0.5 * np.sin(alpha))


def u_of(alpha):
    alpha = np.asarray(alpha, dtype=float)
    return 6.0 * np.arccos(np.cos(alpha) / np.sqrt(4.0 - np.sin(alpha) ** 2))


def v_of(alpha):
    return -0.5 * np.arcsin(0.5 * np.sin(alpha))


@dataclass(frozen=True)
class HexArcParams:
    alpha: float

    @property
    def alpha_tilde(self) -> float:
        return float(alpha_tilde(self.alpha))

    @property
    def u(self) -> float:
        return float(u_of(self.alpha))

    @property
    def v(self) -> float:
        return float(v_of(self.alpha))


def _window(t):
    t = np.asarray(t, dtype=float)
    t_mod = t - np.floor(t)
    index = np.rint(6.0 * t_mod)
    return index.astype(int) % 6, t_mod - index / 6.0


def window_lift(alpha, s):
    """W_alpha(s), broadcasting alpha against s."""
    alpha, s = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(s, dtype=float))
    u = u_of(alpha)
    v = v_of(alpha)
    return rot.product(
        rot.exp_im(0.5 * alpha[..., None] * _J),
        rot.exp_im((u * s)[..., None] * _K),
        rot.exp_im(v[..., None] * _J),
    )


def hexarc_lift(alpha, t) -> np.ndarray:
    """B~_alpha(t) for any real t (period 1), broadcasting alpha against t."""
    alpha, t = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(t, dtype=float))
    m, s = _window(t)
    odd = m % 2 == 1
    turns = np.where(odd, (m - 3) // 2, m // 2)
    left = rot.exp_im((2.0 * np.pi * turns / 3.0)[..., None] * _K)
    right = window_lift(np.where(odd, -alpha, alpha), s)
    out = rot.multiply(left, right)
    return np.where(odd[..., None], -out, out)


def gamma_lift(alpha, t) -> np.ndarray:
    """Gamma~_alpha(t) = B~_alpha(t) h^-1."""
    return rot.multiply(hexarc_lift(alpha, t), rot.conjugate(rot.H))


def kappa_expected(alpha, t):
    """Geodesic curvature of gamma_alpha: tan(pi/4 + a~) on even windows, tan(pi/4 - a~) on odd."""
    m, _ = _window(t)
    at = alpha_tilde(alpha)
    return np.where(m % 2 == 0, np.tan(np.pi / 4 + at), np.tan(np.pi / 4 - at))


def window_grid(cells: int = DEFAULT_CELLS, shift: float = 0.0) -> np.ndarray:
    """A uniform grid of [0, 1] merged with the window joints t = (2m+1)/12 - shift (mod 1)."""
    joints = np.mod((2 * np.arange(6) + 1) / 12.0 - shift, 1.0)
    grid = np.union1d(np.linspace(0.0, 1.0, cells + 1), joints)
    keep = np.concatenate(([True], np.diff(grid) > 1e-12))
    grid = grid[keep]
    grid[-1] = 1.0
    return grid


def beta(alpha: float, cells: int = DEFAULT_CELLS) -> FramedCurve:
    """The closed immersed curve beta_alpha(t) = B_alpha(t) e1 (possibly not convex)."""
    grid = window_grid(cells)
    curve = FramedCurve.from_lifts(grid, hexarc_lift(alpha, grid))
    return curve.with_metadata(family="beta", alpha=float(alpha))


def gamma_alpha(alpha: float, cells: int = DEFAULT_CELLS) -> FramedCurve:
    """The locally convex curve gamma_alpha(t) = B_alpha(t)(e1 + e3)/sqrt(2)."""
    grid = window_grid(cells)
    curve = FramedCurve.from_lifts(grid, gamma_lift(alpha, grid))
    return curve.with_metadata(family="gamma", alpha=float(alpha))


def sphere_angles(p) -> tuple[np.ndarray, np.ndarray]:
    """(theta, alpha) with p = (cos theta sin alpha, sin theta sin alpha, -cos alpha)."""
    p = rot.normalize(p)
    alpha = np.arccos(np.clip(-p[..., 2], -1.0, 1.0))
    theta = np.mod(np.arctan2(p[..., 1], p[..., 0]), 2 * np.pi)
    theta = np.where(np.sin(alpha) < 1e-12, 0.0, theta)
    return theta, alpha


def sphere_point(theta, alpha) -> np.ndarray:
    """The point at longitude theta and angle alpha from the south pole; the arguments broadcast."""
    theta, alpha = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(alpha, dtype=float))
    return np.stack([
        np.cos(theta) * np.sin(alpha),
        np.sin(theta) * np.sin(alpha),
        -np.cos(alpha),
    ], axis=-1)


def g0_lift(points, t) -> np.ndarray:
    """
    Vectorized lifted frames of g0: points (m, 3), times (n,) -> (m, n, 4).
    g0(p)~(t) = h B~_alpha(tau)^-1 B~_alpha(t + tau) h^-1 with tau = theta / (6 pi).
    """
    theta, alpha = sphere_angles(np.atleast_2d(points))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    tau = theta / (6 * np.pi)
    start = hexarc_lift(alpha, tau)[:, None, :]
    moving = hexarc_lift(alpha[:, None], t[None, :] + tau[:, None])
    relative = rot.multiply(rot.conjugate(start), moving)
    return rot.product(rot.H, relative, rot.conjugate(rot.H))


def g0(p, cells: int = DEFAULT_CELLS) -> FramedCurve:
    """The closed curve g0(p), a rotated and shifted copy of gamma_alpha; g0(s) = nu_2."""
    theta, alpha = sphere_angles(np.asarray(p, dtype=float))
    tau = float(theta) / (6 * np.pi)
    grid = window_grid(cells, shift=tau)
    lifts = g0_lift(np.asarray(p, dtype=float)[None, :], grid)[0]
    lifts[0] = rot.ONE
    curve = FramedCurve.from_lifts(grid, lifts)
    return curve.with_metadata(family="g0", theta=float(theta), alpha=float(alpha))


def bump_w(t) -> np.ndarray:
    """
    The alpha-derivative (B~_0(t))^-1 d/dalpha B~_alpha(t) at alpha = 0 on the
    window [-1/12, 1/12], as an imaginary quaternion (x, y, z).
    """
    t = np.asarray(t, dtype=float)
    return np.stack([
        0.5 * np.sin(4 * np.pi * t),
        0.25 * (2 * np.cos(4 * np.pi * t) - 1.0),
        np.zeros_like(t),
    ], axis=-1)


def path_nu(n: int, sigma: float, cells: int = DEFAULT_CELLS) -> FramedCurve:
    """
    A path from nu_n (sigma = 0) to a reparametrization of nu_{n+2} (sigma = 1)
    through locally convex curves with the same endpoint lift.
    """
    if n < 2:
        raise ValueError("path_nu needs n > 1")
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must lie in [0, 1]")
    move = g0(sphere_point(0.0, sigma * np.pi), cells)
    if n == 2:
        curve = move
    else:
        curve = splice([(nu(n - 2, cells), (n - 2) / n), (move, 2 / n)])
    return curve.with_metadata(family="path_nu", n=n, sigma=float(sigma))
