"""Homogeneous-geometry primitives.

Stereohomology operators (central/parallel projection, reflection,
homology, shearing) built as modified Householder matrices, the
cutting/augmenting pair for axis planes, bisection planes, camera
classification, camera centers and normal forms.

All functions are pure: inputs are copied to float arrays and never
mutated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    CoincidentPlanes,
    IncidentCenter,
    NonIncidentCenter,
    RankDeficient,
    Unnormalizable,
)

#: |s^T pi| <= INCIDENCE_TOL * |s| |pi| counts as incident.
INCIDENCE_TOL = 1e-10
#: Relative singular-value floor for "row rank 3".
RANK_TOL = 1e-12
#: Relative size below which the first three entries of row 3 count as zero.
AFFINE_TOL = 1e-12


class AxisPlane(str, enum.Enum):
    XOY = "xoy"
    YOZ = "yoz"
    XOZ = "xoz"


# index of the coordinate dropped by the cutting matrix
_CUT_INDEX = {AxisPlane.XOY: 2, AxisPlane.YOZ: 0, AxisPlane.XOZ: 1}


class CameraKind(str, enum.Enum):
    PINHOLE = "pinhole"
    AFFINE = "affine"
    GENERAL_LINEAR = "general_linear"


@dataclass(frozen=True, eq=False)
class CameraMatrix:
    """A full-row-rank 3x4 camera with its classification."""

    P: np.ndarray
    kind: CameraKind

    @classmethod
    def from_array(cls, P) -> "CameraMatrix":
        P = _as_camera_array(P)
        return cls(P, classify_camera(P))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.P, dtype=dtype)


def _vec4(x, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=float).reshape(-1)
    if a.shape != (4,):
        raise ValueError(f"{name} must have 4 components, got shape {a.shape}")
    if not np.any(a):
        raise ValueError(f"{name} must not be the zero vector")
    return a


def _as_camera_array(P) -> np.ndarray:
    if isinstance(P, CameraMatrix):
        return P.P.copy()
    a = np.array(P, dtype=float)
    if a.shape != (3, 4):
        raise ValueError(f"camera matrix must be 3x4, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("camera matrix has non-finite entries")
    return a


def canonical(h) -> np.ndarray:
    """Unit-norm representative with the first nonzero component positive."""
    a = np.asarray(h, dtype=float).reshape(-1)
    norm = np.linalg.norm(a)
    if norm == 0:
        raise ValueError("cannot canonicalize the zero vector")
    a = a / norm
    nz = np.flatnonzero(np.abs(a) > 1e-14)
    if a[nz[0]] < 0:
        a = -a
    return a


def same_up_to_scale(a, b, tol: float = 1e-10) -> bool:
    """True when ``a`` and ``b`` are proportional (nonzero scale) within ``tol``."""
    return bool(np.linalg.norm(canonical(a) - canonical(b)) <= tol)


def is_incident(s, pi, tol: float = INCIDENCE_TOL) -> bool:
    s = np.asarray(s, dtype=float)
    pi = np.asarray(pi, dtype=float)
    return abs(s @ pi) <= tol * np.linalg.norm(s) * np.linalg.norm(pi)


def _non_incident_pair(s, pi):
    s = _vec4(s, "center")
    pi = _vec4(pi, "plane")
    if is_incident(s, pi):
        raise IncidentCenter(f"center {s} lies on plane {pi} (s^T pi = {s @ pi:.3g})")
    return s, pi


def projection_operator(s, pi) -> np.ndarray:
    """Central projection from ``s`` onto ``pi``: ``I - s pi^T / (s^T pi)``.

    An infinite ``s`` (last component zero) gives a parallel projection.
    The result is singular, idempotent, annihilates ``s`` and fixes every
    point of ``pi``.
    """
    s, pi = _non_incident_pair(s, pi)
    return np.eye(4) - np.outer(s, pi) / (s @ pi)


def reflection_operator(s, pi) -> np.ndarray:
    """Involutory homology ``I - 2 s pi^T / (s^T pi)`` with mirror ``pi``.

    With ``s`` the (infinite) normal direction of ``pi`` this is the
    orthographic mirror; any other non-incident ``s`` gives a skew mirror.
    """
    s, pi = _non_incident_pair(s, pi)
    return np.eye(4) - 2.0 * np.outer(s, pi) / (s @ pi)


def homology_operator(s, pi, rho: float, lam: float = 1.0) -> np.ndarray:
    """Space homology / elementary scaling ``lam I + (rho - lam) s pi^T / (s^T pi)``.

    ``T s = rho s`` and ``T x = lam x`` for every ``x`` on ``pi``.
    """
    if lam == 0:
        raise ValueError("lam must be nonzero")
    s, pi = _non_incident_pair(s, pi)
    return lam * np.eye(4) + (rho - lam) * np.outer(s, pi) / (s @ pi)


def shearing_operator(s, pi, lam: float = 1.0, mu: float = 1.0) -> np.ndarray:
    """Elation ``lam I + mu s pi^T / sqrt(s^T s pi^T pi)``; requires ``s`` on ``pi``.

    With ``s`` and ``pi`` both infinite this is a translation.
    """
    s = _vec4(s, "center")
    pi = _vec4(pi, "plane")
    if not is_incident(s, pi):
        raise NonIncidentCenter(f"shearing needs s on pi, got s^T pi = {s @ pi:.3g}")
    scale = np.sqrt((s @ s) * (pi @ pi))
    return lam * np.eye(4) + mu * np.outer(s, pi) / scale


def cutting_matrix(axis_plane: AxisPlane | str = AxisPlane.XOY) -> np.ndarray:
    """3x4 identity with the row of the axis-plane normal removed."""
    drop = _CUT_INDEX[AxisPlane(axis_plane)]
    return np.delete(np.eye(4), drop, axis=0)


def augmenting_matrix(axis_plane: AxisPlane | str = AxisPlane.XOY) -> np.ndarray:
    """4x3 identity with a zero row inserted; the transpose of the cutting matrix."""
    return cutting_matrix(axis_plane).T


def _unit_plane(pi) -> np.ndarray:
    pi = _vec4(pi, "plane")
    nn = np.linalg.norm(pi[:3])
    if nn == 0:
        raise ValueError("plane at infinity has no normal direction")
    return pi / nn


def dihedral_planes(pi1, pi2, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """The two planes through ``pi1 ∩ pi2`` at dihedral angle ``theta`` to ``pi1``.

    Parameters
    ----------
    pi1, pi2 : array_like, shape (4,)
        Plane covectors; normalized internally so the normal has unit norm.
    theta : float
        Angle in radians.

    Returns
    -------
    (ndarray, ndarray)
        ``sin(omega - theta) pi1 + sin(theta) pi2`` and
        ``sin(omega + theta) pi1 - sin(theta) pi2``, where ``omega`` is the
        angle between the unit normals (``cos omega = n1 . n2``). At
        ``theta = omega / 2`` the first output is proportional to
        ``pi1 + pi2``.

    Raises
    ------
    CoincidentPlanes
        When the two planes are parallel or identical (no pencil axis).
    """
    p1 = _unit_plane(pi1)
    p2 = _unit_plane(pi2)
    cos_omega = float(np.clip(p1[:3] @ p2[:3], -1.0, 1.0))
    if 1.0 - abs(cos_omega) <= 1e-14:
        raise CoincidentPlanes("planes are parallel; the dihedral pencil is undefined")
    omega = np.arccos(cos_omega)
    a = np.sin(omega - theta) * p1 + np.sin(theta) * p2
    b = np.sin(omega + theta) * p1 - np.sin(theta) * p2
    return a, b


def bisection_planes(pi1, pi2) -> tuple[np.ndarray, np.ndarray]:
    """Both bisectors ``pi1 + pi2`` and ``pi1 - pi2`` of two unit-normal planes."""
    p1 = _unit_plane(pi1)
    p2 = _unit_plane(pi2)
    if np.allclose(p1, p2, rtol=0, atol=1e-14) or np.allclose(p1, -p2, rtol=0, atol=1e-14):
        raise CoincidentPlanes("identical planes have no bisector")
    return p1 + p2, p1 - p2


def classify_camera(P) -> CameraKind:
    """Classify a 3x4 matrix as pinhole, affine or general linear.

    Raises :class:`RankDeficient` when the row rank is below 3.
    """
    P = _as_camera_array(P)
    sv = np.linalg.svd(P, compute_uv=False)
    if sv[2] <= RANK_TOL * sv[0]:
        raise RankDeficient(f"camera row rank < 3 (singular values {sv})")
    row3 = P[2]
    if np.linalg.norm(row3[:3]) <= AFFINE_TOL * np.linalg.norm(row3):
        return CameraKind.AFFINE
    svm = np.linalg.svd(P[:, :3], compute_uv=False)
    if svm[2] > RANK_TOL * svm[0]:
        return CameraKind.PINHOLE
    return CameraKind.GENERAL_LINEAR


def camera_center(P) -> np.ndarray:
    """Right null vector of the camera matrix.

    Finite centers are returned with last component 1. Infinite centers
    (affine and general linear cameras) are returned with last component
    exactly 0, unit spatial part, sign canonical (first nonzero positive).
    """
    cam = P if isinstance(P, CameraMatrix) else CameraMatrix.from_array(P)
    A = cam.P
    if cam.kind is CameraKind.PINHOLE:
        c = -np.linalg.solve(A[:, :3], A[:, 3])
        return np.append(c, 1.0)
    # left block has rank 2: its null vector is the direction
    _, _, vt = np.linalg.svd(A[:, :3])
    d = vt[-1]
    return np.append(canonical(d), 0.0)


def normalized_with_scale(P) -> tuple[np.ndarray, float, CameraKind]:
    """Normal form ``Pn`` with ``P = scale * Pn``.

    Pinhole: third-row normal has unit norm and nonnegative z entry.
    Affine: entry (3, 4) is 1 and the first three of row 3 are exactly 0.
    """
    cam = P if isinstance(P, CameraMatrix) else CameraMatrix.from_array(P)
    A = cam.P.copy()
    if cam.kind is CameraKind.PINHOLE:
        n = A[2, :3]
        scale = float(np.linalg.norm(n))
        if n[2] != 0:
            sign = np.sign(n[2])
        else:
            sign = np.sign(n[np.flatnonzero(n)[0]])
        scale *= sign
        Pn = A / scale
        return Pn, scale, cam.kind
    if cam.kind is CameraKind.AFFINE:
        scale = float(A[2, 3])
        Pn = A / scale
        Pn[2] = (0.0, 0.0, 0.0, 1.0)
        return Pn, scale, cam.kind
    raise Unnormalizable(
        "general linear camera has no pinhole/affine normal form; "
        "reduce it with normalize_general_to_affine first"
    )


def normalize_camera(P) -> CameraMatrix:
    """Pinhole or affine normal form of ``P`` (scale dropped)."""
    Pn, _, kind = normalized_with_scale(P)
    return CameraMatrix(Pn, kind)
