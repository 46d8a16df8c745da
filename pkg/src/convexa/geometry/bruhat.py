"""
Bruhat cells of SO(3) and their lifts to S^3.

A signed permutation is stored by columns: perm[j] is the (1-based) row of the
non-zero entry of column j and signs[j] its sign. Cells are named
"<cycle>;<code>" where the code reads the column signs in binary, column 1
first, with '-' as 1; e.g. "(13);2" is the open cell of stably convex frames.
"""
import logging
import re
from dataclasses import dataclass
from functools import cached_property
from itertools import permutations, product
from typing import NamedTuple

import numpy as np

from convexa.errors import BranchAmbiguous, NearBoundary, WrongCell
from convexa.geometry import rotations as rot

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


def _cycle_notation(perm: tuple[int, ...]) -> str:
    seen = set()
    cycles = []
    for start in range(1, len(perm) + 1):
        if start in seen or perm[start - 1] == start:
            seen.add(start)
            continue
        cycle = []
        current = start
        while current not in seen:
            seen.add(current)
            cycle.append(current)
            current = perm[current - 1]
        cycles.append("(" + "".join(str(c) for c in cycle) + ")")
    return "".join(cycles) or "e"


def _parse_cycles(text: str, n: int = 3) -> tuple[int, ...]:
    mapping = {i: i for i in range(1, n + 1)}
    if text != "e":
        for cycle in re.findall(r"\((\d+)\)", text):
            elems = [int(c) for c in cycle]
            for a, b in zip(elems, elems[1:] + elems[:1]):
                mapping[a] = b
    return tuple(mapping[i] for i in range(1, n + 1))


@dataclass(frozen=True)
class SignedPerm:
    perm: tuple[int, int, int]
    signs: tuple[int, int, int]

    @property
    def matrix(self) -> np.ndarray:
        m = np.zeros((3, 3))
        for col, (row, sign) in enumerate(zip(self.perm, self.signs)):
            m[row - 1, col] = sign
        return m

    @property
    def inversions(self) -> int:
        p = self.perm
        return sum(1 for i in range(3) for j in range(i + 1, 3) if p[i] > p[j])

    @property
    def code(self) -> int:
        return sum((1 if s < 0 else 0) << (2 - j) for j, s in enumerate(self.signs))

    @property
    def name(self) -> str:
        return f"{_cycle_notation(self.perm)};{self.code}"

    def __str__(self) -> str:
        return self.name

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "SignedPerm":
        m = np.asarray(m)
        rows = tuple(int(np.argmax(np.abs(m[:, j]))) + 1 for j in range(3))
        signs = tuple(int(np.sign(m[rows[j] - 1, j])) for j in range(3))
        return cls(rows, signs)

    @classmethod
    def from_name(cls, name: str) -> "SignedPerm":
        cycles, code = name.split(";")
        code = int(code)
        signs = tuple(-1 if (code >> (2 - j)) & 1 else 1 for j in range(3))
        return cls(_parse_cycles(cycles.strip()), signs)


@dataclass(frozen=True)
class CellId:
    rep: SignedPerm

    @property
    def dim(self) -> int:
        return self.rep.inversions

    @property
    def name(self) -> str:
        return self.rep.name

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class LiftedSignedPerm:
    q: tuple[float, float, float, float]

    @property
    def quaternion(self) -> np.ndarray:
        return np.array(self.q)

    @cached_property
    def cell(self) -> CellId:
        return CellId(SignedPerm.from_matrix(rot.project(self.quaternion)))

    def __neg__(self) -> "LiftedSignedPerm":
        return LiftedSignedPerm(tuple(-c for c in self.q))

    def __str__(self) -> str:
        return _format_quaternion(self.quaternion)


def _format_quaternion(q: np.ndarray) -> str:
    terms = []
    for coeff, unit in zip(q, ("1", "i", "j", "k")):
        if abs(coeff) < 1e-12:
            continue
        terms.append(f"{coeff:+.4g}{'' if unit == '1' else unit}")
    return "".join(terms) or "0"


def _permutation_sign(perm: tuple[int, ...]) -> int:
    inversions = sum(1 for i in range(3) for j in range(i + 1, 3) if perm[i] > perm[j])
    return -1 if inversions % 2 else 1


def _build_b3_plus() -> list[SignedPerm]:
    out = []
    for perm in permutations((1, 2, 3)):
        for signs in product((1, -1), repeat=3):
            if _permutation_sign(perm) * np.prod(signs) == 1:
                out.append(SignedPerm(perm, signs))
    return out


def _build_b3_plus_lifted() -> list[LiftedSignedPerm]:
    out = []
    half = 0.5
    inv_sqrt2 = 1.0 / rot.SQRT2
    for axis in range(4):
        for sign in (1.0, -1.0):
            q = [0.0] * 4
            q[axis] = sign
            out.append(LiftedSignedPerm(tuple(q)))
    for a in range(4):
        for b in range(a + 1, 4):
            for sa, sb in product((1.0, -1.0), repeat=2):
                q = [0.0] * 4
                q[a], q[b] = sa * inv_sqrt2, sb * inv_sqrt2
                out.append(LiftedSignedPerm(tuple(q)))
    for signs in product((1.0, -1.0), repeat=4):
        out.append(LiftedSignedPerm(tuple(half * s for s in signs)))
    return out


B3_PLUS = _build_b3_plus()
B3_PLUS_LIFTED = _build_b3_plus_lifted()

IDENTITY_CELL = CellId(SignedPerm((1, 2, 3), (1, 1, 1)))
OPEN_CELL = "(13);2"
OPEN_CELLS = ("(13);1", "(13);2", "(13);4", "(13);7")
OPEN_CELL_CODES = (1, 2, 4, 7)
CONVEX_CELLS = frozenset({"(13);2", "(123);6", "(132);0", "(23);2", "(12);4", "e;0"})
GRAFTABLE_CELLS = frozenset({
    "(13);1", "(13);4", "(13);7", "(123);3", "(123);5", "(132);5", "(132);6", "e;5",
})
# the five cells bounding the open convex cell; the first four are good exits
GOOD_EXIT_CELLS = frozenset({"(123);6", "(132);0", "(23);2", "(12);4"})
A1_CELLS = frozenset({"(13);1", "(13);4", "(13);7", "(123);3", "(123);5", "(132);5", "(132);6"})
A2_CELLS = A1_CELLS | frozenset({"(13);2", "(123);6", "(132);0", "(23);2", "(12);4"})

_S = 1.0 / rot.SQRT2
STABLY_CONVEX_LIFT = np.array([0.0, _S, 0.0, _S])
CONVEX_LIFTS = (
    STABLY_CONVEX_LIFT,
    np.array([-0.5, 0.5, -0.5, 0.5]),
    np.array([-0.5, 0.5, 0.5, 0.5]),
    np.array([-_S, _S, 0.0, 0.0]),
    np.array([-_S, 0.0, 0.0, _S]),
    np.array([-1.0, 0.0, 0.0, 0.0]),
)


class NormalForm(NamedTuple):
    perm: SignedPerm
    u0: np.ndarray
    u1: np.ndarray


def _check_band(value: float, tol: float, where: str):
    mag = abs(value)
    if tol / 10 < mag < tol * 10:
        raise NearBoundary(f"entry {where} = {value:.3e} within a decade of tol {tol:g}")


def normal_form(q: np.ndarray, tol: float = DEFAULT_TOL) -> NormalForm:
    """
    Reduces Q to its signed permutation P with U0 Q U1^-1 = P, U0 and U1 upper
    triangular with positive diagonal and determinant 1.
    """
    m = np.array(q, dtype=float)
    left = np.eye(3)
    right = np.eye(3)
    used = set()
    perm = [0, 0, 0]
    for col in range(3):
        pivot = None
        for row in range(3):
            if row in used:
                continue
            _check_band(m[row, col], tol, f"({row + 1},{col + 1})")
            if abs(m[row, col]) > tol:
                pivot = row
        if pivot is None:
            raise NearBoundary(f"column {col + 1} has no pivot above tol {tol:g}")
        # rows above the pivot: add multiples of the (lower) pivot row
        for row in range(pivot):
            if row in used or m[row, col] == 0.0:
                continue
            factor = m[row, col] / m[pivot, col]
            m[row, :] -= factor * m[pivot, :]
            left[row, :] -= factor * left[pivot, :]
        # columns right of the pivot: add multiples of the (earlier) pivot column
        for other in range(col + 1, 3):
            if m[pivot, other] == 0.0:
                continue
            factor = m[pivot, other] / m[pivot, col]
            m[:, other] -= factor * m[:, col]
            right[:, other] -= factor * right[:, col]
        used.add(pivot)
        perm[col] = pivot + 1

    pivots = np.array([m[perm[j] - 1, j] for j in range(3)])
    signs = tuple(int(s) for s in np.sign(pivots))
    d = np.diag(np.abs(pivots))
    # M = L Q C and P = M D^-1, so U0 = L and U1 = D C^-1
    u0 = left
    u1 = d @ np.linalg.inv(right)
    return NormalForm(SignedPerm(tuple(perm), signs), u0, u1)


def cell_id(q: np.ndarray, tol: float = DEFAULT_TOL) -> CellId:
    return CellId(normal_form(q, tol).perm)


def cell_with_retries(q: np.ndarray, tols=(1e-6, 1e-5, 1e-7)) -> CellId:
    """Classifies a frame known to be near a cell boundary, trying several tolerances."""
    last = None
    for tol in tols:
        try:
            return cell_id(q, tol)
        except NearBoundary as e:
            logger.debug(f"cell classification at tol {tol:g} failed: {e}")
            last = e
    raise last


def cell_of_quaternion(z: np.ndarray, tol: float = DEFAULT_TOL) -> CellId:
    return cell_id(rot.project(z), tol)


def is_open_convex(q: np.ndarray, minor_sign: int = 1, tol: float = DEFAULT_TOL):
    """
    Membership in the open cell (13);2 through the signs of Q31 and the
    south-west minor Q21 Q32 - Q22 Q31 (vectorized over leading axes).
    Minors within tol of zero count as the boundary, not the open cell.
    """
    q31, minor = open_cell_minors(q)
    return (q31 > tol) & (minor_sign * minor > tol)


def open_cell_minors(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q = np.asarray(q, dtype=float)
    return q[..., 2, 0], q[..., 1, 0] * q[..., 2, 1] - q[..., 1, 1] * q[..., 2, 0]


def open_cell_code(q: np.ndarray, tol: float = DEFAULT_TOL) -> int | None:
    """The code of the open cell (13);c containing Q, or None within tol of the boundary."""
    q31, minor = open_cell_minors(q)
    if abs(q31) <= tol or abs(minor) <= tol:
        return None
    table = {(1, 1): 2, (1, -1): 1, (-1, 1): 4, (-1, -1): 7}
    return table.get((int(np.sign(q31)), int(np.sign(minor))))


def is_open_cell(q: np.ndarray, code: int) -> bool:
    if code not in OPEN_CELL_CODES:
        raise ValueError(f"no open cell (13);{code}")
    return open_cell_code(q) == code


def _nearest_lifted(q: np.ndarray) -> tuple[LiftedSignedPerm, float]:
    best, best_dist = None, np.inf
    for element in B3_PLUS_LIFTED:
        dist = float(rot.chordal(q, element.quaternion))
        if dist < best_dist:
            best, best_dist = element, dist
    return best, best_dist


def signed_cell(z: np.ndarray, tol: float = DEFAULT_TOL, steps: int = 64,
                max_steps: int = 4096) -> LiftedSignedPerm:
    """
    The element of the 48-element lifted group reached by sliding z inside its
    cell towards the representative, s -> pi((1-s)I + s U0)(Pi(z)).
    """
    z = rot.normalize(z)
    frame = rot.project(z)
    nf = normal_form(frame, tol)
    while True:
        s = np.linspace(0.0, 1.0, steps + 1)
        slide = (1.0 - s)[:, None, None] * np.eye(3) + s[:, None, None] * nf.u0
        path = rot.gram_schmidt(slide @ frame)
        try:
            lifted = rot.lift_path(path, z)
            break
        except BranchAmbiguous:
            if steps * 2 > max_steps:
                raise
            steps *= 2
            logger.debug(f"signed_cell: doubling lift steps to {steps}")
    element, dist = _nearest_lifted(lifted[-1])
    if dist > 1e-6:
        raise NearBoundary(f"slid lift ends {dist:.2e} away from the lifted group")
    return element


def _matches_any(element: LiftedSignedPerm, candidates) -> bool:
    return any(rot.chordal(element.quaternion, c) < 1e-9 for c in candidates)


def is_convex_matrix(q: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return cell_id(q, tol).name in CONVEX_CELLS


def is_convex_quat(z: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return _matches_any(signed_cell(z, tol), CONVEX_LIFTS)


def is_stably_convex_quat(z: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return _matches_any(signed_cell(z, tol), (STABLY_CONVEX_LIFT,))


def is_anticonvex_quat(z: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return is_convex_quat(-np.asarray(z, dtype=float), tol)


def is_graftable(q: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return cell_id(q, tol).name in GRAFTABLE_CELLS


def _e(x=0.0, y=0.0, z=0.0) -> np.ndarray:
    return rot.exp_im(np.array([x, y, z]))


# lifts of the normalized frames at t0 and t1 for the three open graftable cells
GRAFT_FRAME_LIFTS = {
    1: (_e(y=-np.pi / 6), rot.product(_e(z=np.pi / 2), _e(y=np.pi / 12), _e(x=np.pi / 2))),
    4: (_e(y=-np.pi / 12), rot.product(_e(z=np.pi / 2), _e(y=np.pi / 6), _e(x=np.pi / 2))),
    7: (_e(y=-np.pi / 8), rot.product(_e(y=np.pi / 8), _e(x=np.pi / 2))),
}
GRAFT_FRAMES = {
    ell: (rot.project(q0), rot.project(q1)) for ell, (q0, q1) in GRAFT_FRAME_LIFTS.items()
}


def graft_normalizer(q0: np.ndarray, q1: np.ndarray, ell: int, tol: float = 1e-7) -> np.ndarray:
    """
    The unit upper triangular U with pi(Q0_ell U Q0^-1)(Q_i) = Q_{i,ell}, i = 0, 1.
    """
    if ell not in GRAFT_FRAMES:
        raise WrongCell(f"no normalized frames for cell (13);{ell}")
    relative = np.asarray(q0).T @ np.asarray(q1)
    nf = normal_form(relative, tol)
    expected = f"(13);{ell}"
    if nf.perm.name != expected:
        raise WrongCell(f"Q0^-1 Q1 lies in {nf.perm.name}, expected {expected}")
    target0, target1 = GRAFT_FRAMES[ell]
    nf_target = normal_form(target0.T @ target1, tol)
    return np.linalg.solve(nf_target.u0, nf.u0)
