from .circles import circle, equator, nu, nu1_circle_basis, nu_segment
from .ellipses import (
    convex_connect,
    convex_connect_end,
    fit_ellipse,
    osculating_ellipse,
    osculating_ellipse_end,
    scale_matrix,
    shear_matrix,
    slide_matrix,
)
from .hexarc import (
    NORTH,
    SOUTH,
    HexArcParams,
    beta,
    bump_w,
    g0,
    g0_lift,
    gamma_alpha,
    gamma_lift,
    hexarc_lift,
    kappa_expected,
    path_nu,
    sphere_angles,
    sphere_point,
    u_of,
    v_of,
    window_lift,
)
from .patched import (
    PatchWindows,
    cap_map,
    find_eps0,
    g_hat,
    gs,
    h_hat,
    increasing_table,
    patch_windows,
    shear_parameter,
)

__all__ = [
    "circle",
    "equator",
    "nu",
    "nu1_circle_basis",
    "nu_segment",
    "convex_connect",
    "convex_connect_end",
    "fit_ellipse",
    "osculating_ellipse",
    "osculating_ellipse_end",
    "scale_matrix",
    "shear_matrix",
    "slide_matrix",
    "NORTH",
    "SOUTH",
    "HexArcParams",
    "beta",
    "bump_w",
    "g0",
    "g0_lift",
    "gamma_alpha",
    "gamma_lift",
    "hexarc_lift",
    "kappa_expected",
    "path_nu",
    "sphere_angles",
    "sphere_point",
    "u_of",
    "v_of",
    "window_lift",
    "PatchWindows",
    "cap_map",
    "find_eps0",
    "g_hat",
    "gs",
    "h_hat",
    "increasing_table",
    "patch_windows",
    "shear_parameter",
]
