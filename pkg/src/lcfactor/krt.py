"""KRt decomposition through an RQ factorization built from QR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import homgeom
from .errors import InternalConsistencyError, NotPinhole, Singular
from .homgeom import CameraKind, CameraMatrix

# row-reversal permutation I_r(3)
_J = np.eye(3)[::-1]


@dataclass(frozen=True, eq=False)
class RQResult:
    R_upper: np.ndarray
    Q: np.ndarray


@dataclass(frozen=True, eq=False)
class KrtDecomposition:
    """``P ~ K [R | t]`` with ``t = -R C``."""

    K: np.ndarray
    R: np.ndarray
    C: np.ndarray

    @property
    def t(self) -> np.ndarray:
        return -self.R @ self.C

    def compose(self) -> np.ndarray:
        return self.K @ np.hstack([self.R, self.t[:, None]])

    def to_dict(self) -> dict:
        return {
            "K": self.K.tolist(),
            "R": self.R.tolist(),
            "C": self.C.tolist(),
            "t": self.t.tolist(),
        }


def rq3(A) -> RQResult:
    """RQ factorization ``A = R Q`` of a nonsingular 3x3 matrix.

    With ``J`` the row reversal, QR of ``J A^T J`` gives ``A = (J R^T J)(J Q^T J)``;
    the diagonal of the upper factor is then made positive.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (3, 3):
        raise ValueError(f"rq3 expects a 3x3 matrix, got {A.shape}")
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[2] <= 1e-14 * sv[0]:
        raise Singular(f"matrix is singular (singular values {sv})")
    Qt, Rt = np.linalg.qr(_J @ A.T @ _J)
    R = _J @ Rt.T @ _J
    Q = _J @ Qt.T @ _J
    D = np.diag(np.where(np.diag(R) < 0, -1.0, 1.0))
    return RQResult(R @ D, D @ Q)


def krt_decompose(P) -> KrtDecomposition:
    """Intrinsics, rotation and center of a pinhole camera.

    ``K`` has positive diagonal and ``K[2, 2] = 1``; ``det R = +1``. The
    overall sign of ``P`` is free, so a reflection in ``Q`` is absorbed by
    decomposing ``-M`` instead.
    """
    cam = P if isinstance(P, CameraMatrix) else CameraMatrix.from_array(P)
    if cam.kind is not CameraKind.PINHOLE:
        raise NotPinhole(f"camera is {cam.kind.value}, not pinhole")
    M = cam.P[:, :3]
    rq = rq3(M)
    if np.linalg.det(rq.Q) < 0:
        rq = rq3(-M)
    K = rq.R_upper / rq.R_upper[2, 2]
    C = homgeom.camera_center(cam)[:3]
    return KrtDecomposition(K, rq.Q, C)


def krt_from_lc(factors, tol: float = 1e-8) -> KrtDecomposition:
    """KRt of the camera described by pinhole LC factors.

    Also checks the parameter correspondence ``K13 = u``, ``K23 = v``,
    ``K22 = |f|``, ``K12 = tau |f|``, ``K11 = |sigma f|``.
    """
    from .pinhole import compose

    P, _ = compose(factors)
    dec = krt_decompose(P)
    K = dec.K
    f = abs(factors.f)
    expected = {
        (0, 2): factors.u,
        (1, 2): factors.v,
        (1, 1): f,
        (0, 1): factors.tau * f,
        (0, 0): abs(factors.sigma * f),
    }
    for (i, j), want in expected.items():
        if abs(K[i, j] - want) > tol * max(1.0, abs(want)):
            raise InternalConsistencyError(
                f"K[{i + 1},{j + 1}] = {K[i, j]!r} does not match LC value {want!r}"
            )
    return dec
