"""LC factorization of pinhole cameras.

A pinhole camera is written as

    P ~ (8)(7)(6)(5)(4)(3)(2)(1)

with (1) the 4x4 central projection from the camera center onto the 3D
image plane, (2) a mirror taking the image plane onto ``xoy``, (3) the
``xoy`` cutting matrix, (4) a translation putting the reflected center at
the 2D origin, (5) a 2D rotation by ``alpha``, (6) aspect ratio ``sigma``,
(7) skew ``tau`` and (8) the principal point ``(u, v)``.

The eleven parameters are recovered in closed form: the center from the
null space, ``(r, theta)`` from the third row, ``f, sigma, tau, u, v`` from
the Kruppa matrix ``M M^T`` and ``(cos alpha, sin alpha)`` from an 8x2
linear system.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import homgeom
from .errors import NoBranchAccepted, NotPinhole, RankDeficientSystem
from .homgeom import CameraKind, CameraMatrix

#: Below this ``r`` the alternate bisector degenerates (parallel planes).
DEGENERATE_R = 1e-8
DEFAULT_TOL = 1e-8


class Mirror(str, enum.Enum):
    """Which bisector of the image plane and ``xoy`` is used as mirror."""

    PLUS = "plus"  # z-component sqrt(1 - r^2) + 1
    MINUS = "minus"  # z-component sqrt(1 - r^2) - 1


class FocalSign(str, enum.Enum):
    NEG = "neg"
    POS = "pos"

    @property
    def sign(self) -> float:
        return -1.0 if self is FocalSign.NEG else 1.0


def _z_plus_minus(r: float) -> tuple[float, float, float]:
    """``(w, z+, z-)`` with ``w = sqrt(1 - r^2)``, cancellation-free."""
    w = math.sqrt(max(0.0, (1.0 - r) * (1.0 + r)))
    return w, 1.0 + w, -r * r / (1.0 + w)


@dataclass(frozen=True)
class IntrinsicCandidate:
    f: float
    sigma: float
    tau: float
    u: float
    v: float
    k: float


_FLOAT_FIELDS = ("f", "sigma", "tau", "u", "v", "alpha", "xs", "ys", "zs", "r", "theta", "scale")


@dataclass(frozen=True)
class PinholeLCFactors:
    """Parameters of one pinhole LC factorization.

    The source camera equals ``scale * compose(self)[0]``.
    """

    f: float
    sigma: float
    tau: float
    u: float
    v: float
    alpha: float
    xs: float
    ys: float
    zs: float
    r: float
    theta: float
    mirror: Mirror = Mirror.PLUS
    scale: float = 1.0

    def __post_init__(self):
        for name in _FLOAT_FIELDS:
            # plain floats, "+ 0.0" folds -0.0 into 0.0
            object.__setattr__(self, name, float(getattr(self, name)) + 0.0)
        object.__setattr__(self, "mirror", Mirror(self.mirror))
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")
        if self.f == 0:
            raise ValueError("oriented focal length must be nonzero")

    @property
    def center(self) -> np.ndarray:
        return np.array([self.xs, self.ys, self.zs, 1.0])

    @property
    def normal(self) -> np.ndarray:
        w, _, _ = _z_plus_minus(self.r)
        return np.array([self.r * math.cos(self.theta), self.r * math.sin(self.theta), w])

    @property
    def d(self) -> float:
        return self.f - float(self.normal @ self.center[:3])

    @property
    def image_plane(self) -> np.ndarray:
        return np.append(self.normal, self.d)

    @property
    def mirror_degenerate(self) -> bool:
        return self.mirror is Mirror.MINUS and self.r <= DEGENERATE_R

    @property
    def mirror_direction(self) -> np.ndarray:
        """(S_R): the infinite normal direction of the mirror plane."""
        _, zp, zm = _z_plus_minus(self.r)
        n = self.normal
        return np.array([n[0], n[1], zp if self.mirror is Mirror.PLUS else zm, 0.0])

    @property
    def mirror_plane(self) -> np.ndarray:
        """(pi_R) = image plane +/- xoy."""
        return np.append(self.mirror_direction[:3], self.d)

    @property
    def us(self) -> float:
        return self._reflected_center_xy()[0]

    @property
    def vs(self) -> float:
        return self._reflected_center_xy()[1]

    def _reflected_center_xy(self) -> tuple[float, float]:
        ct, st = math.cos(self.theta), math.sin(self.theta)
        if self.mirror is Mirror.PLUS:
            _, zp, _ = _z_plus_minus(self.r)
            k = self.r * (self.f + self.zs) / zp
        elif self.mirror_degenerate:
            k = 0.0
        else:
            # r (f - zs) / z-, rewritten without the 1/z- cancellation
            w, _, _ = _z_plus_minus(self.r)
            k = (self.f - self.zs) * (1.0 + w) / self.r
        return self.xs - k * ct, self.ys - k * st

    @property
    def cos_alpha(self) -> float:
        return math.cos(self.alpha)

    @property
    def sin_alpha(self) -> float:
        return math.sin(self.alpha)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mirror"] = self.mirror.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PinholeLCFactors":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


def _reflection_factor(fac: PinholeLCFactors) -> np.ndarray:
    if fac.mirror_degenerate:
        # The alternate bisector is the plane at infinity. Translating pi
        # (z = -d) onto xoy is the distance-preserving substitute; it is
        # the identity exactly when pi is xoy.
        return homgeom.shearing_operator([0, 0, 1, 0], [0, 0, 0, 1], 1.0, fac.d)
    return homgeom.reflection_operator(fac.mirror_direction, fac.mirror_plane)


def _left_2d_factors(fac: PinholeLCFactors) -> dict[int, np.ndarray]:
    ca, sa = fac.cos_alpha, fac.sin_alpha
    return {
        4: np.array([[1.0, 0.0, -fac.us], [0.0, 1.0, -fac.vs], [0.0, 0.0, 1.0]]),
        5: np.array([[ca, sa, 0.0], [-sa, ca, 0.0], [0.0, 0.0, 1.0]]),
        6: np.diag([fac.sigma, 1.0, 1.0]),
        7: np.array([[1.0, fac.tau, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
        8: np.array([[1.0, 0.0, fac.u], [0.0, 1.0, fac.v], [0.0, 0.0, 1.0]]),
    }


def factor_matrices(fac: PinholeLCFactors) -> dict[int, np.ndarray]:
    """Matrices (1)..(8) keyed by their number."""
    mats = {
        1: homgeom.projection_operator(fac.center, fac.image_plane),
        2: _reflection_factor(fac),
        3: homgeom.cutting_matrix(homgeom.AxisPlane.XOY),
    }
    mats.update(_left_2d_factors(fac))
    return mats


def compose(fac: PinholeLCFactors) -> tuple[np.ndarray, dict[int, np.ndarray]]:
    """Product (8)...(1) and the individual factors.

    The product omits ``fac.scale``; ``fac.scale * P`` is the source camera.
    """
    mats = factor_matrices(fac)
    P = mats[1]
    for i in range(2, 9):
        P = mats[i] @ P
    return P, mats


def three2two(fac: PinholeLCFactors) -> np.ndarray:
    """(8)...(2): 3D image points on the image plane -> homogeneous pixels."""
    mats = factor_matrices(fac)
    T = mats[2]
    for i in range(3, 9):
        T = mats[i] @ T
    return T


def two2three(fac: PinholeLCFactors) -> np.ndarray:
    """Inverse of :func:`three2two`: pixels -> 3D image points on the image plane."""
    ca, sa = fac.cos_alpha, fac.sin_alpha
    chain = [
        _reflection_inverse(fac),
        homgeom.augmenting_matrix(homgeom.AxisPlane.XOY),
        np.array([[1.0, 0.0, fac.us], [0.0, 1.0, fac.vs], [0.0, 0.0, 1.0]]),
        np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]]),
        np.diag([1.0 / fac.sigma, 1.0, 1.0]),
        np.array([[1.0, -fac.tau, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
        np.array([[1.0, 0.0, -fac.u], [0.0, 1.0, -fac.v], [0.0, 0.0, 1.0]]),
    ]
    T = chain[-1]
    for m in reversed(chain[:-1]):
        T = m @ T
    return T


def _reflection_inverse(fac: PinholeLCFactors) -> np.ndarray:
    if fac.mirror_degenerate:
        return homgeom.shearing_operator([0, 0, 1, 0], [0, 0, 0, 1], 1.0, -fac.d)
    # involution
    return _reflection_factor(fac)


# --------------------------------------------------------------------------
# closed-form alpha system


def _alpha_table_plus(f, sigma, tau, xs, ys, zs, r, theta) -> np.ndarray:
    _, zp, zm = _z_plus_minus(r)
    c1, s1 = math.cos(theta), math.sin(theta)
    c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
    A = np.array(
        [
            [-zm * (sigma * c2 + tau * s2) - zp * sigma, zm * (tau * c2 - sigma * s2) + zp * tau],
            [zm * (tau * c2 - sigma * s2) - zp * tau, zm * (sigma * c2 + tau * s2) - zp * sigma],
            [2 * r * (sigma * c1 + tau * s1), 2 * r * (sigma * s1 - tau * c1)],
            [
                zm * ((tau * xs + sigma * ys) * s2 + (sigma * xs - tau * ys) * c2)
                + zp * (sigma * xs + tau * ys)
                - 2 * r * zs * (sigma * c1 + tau * s1),
                zm * ((sigma * xs - tau * ys) * s2 - (tau * xs + sigma * ys) * c2)
                + zp * (sigma * ys - tau * xs)
                + 2 * r * zs * (tau * c1 - sigma * s1),
            ],
            [-zm * s2, zm * c2 + zp],
            [zm * c2 - zp, zm * s2],
            [2 * r * s1, -2 * r * c1],
            [
                zm * (xs * s2 - ys * c2) + zp * ys - 2 * r * zs * s1,
                # Sign corrected against direct composition of the factors;
                # the commonly printed entry is the negation of this one.
                -(zm * (xs * c2 + ys * s2) + zp * xs - 2 * r * zs * c1),
            ],
        ]
    )
    return 0.5 * f * A


def _alpha_table_minus(f, sigma, tau, xs, ys, zs, r, theta) -> np.ndarray:
    _, zp, zm = _z_plus_minus(r)
    c1, s1 = math.cos(theta), math.sin(theta)
    c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
    A = np.array(
        [
            [(sigma * c2 + tau * s2) * zp + zm * sigma, zp * (sigma * s2 - tau * c2) - tau * zm],
            [zp * (sigma * s2 - tau * c2) + zm * tau, -zp * (sigma * c2 + tau * s2) + zm * sigma],
            [-2 * r * (sigma * c1 + tau * s1), 2 * r * (tau * c1 - sigma * s1)],
            [
                2 * r * zs * (sigma * c1 + tau * s1)
                - zm * (sigma * xs + tau * ys)
                - zp * ((tau * xs + sigma * ys) * s2 + (sigma * xs - tau * ys) * c2),
                2 * r * zs * (sigma * s1 - tau * c1)
                + zm * (tau * xs - sigma * ys)
                + zp * ((tau * ys - sigma * xs) * s2 + (tau * xs + sigma * ys) * c2),
            ],
            [zp * s2, -zm - zp * c2],
            [zm - zp * c2, -zp * s2],
            [-2 * r * s1, 2 * r * c1],
            [
                zp * (ys * c2 - xs * s2) + 2 * r * zs * s1 - zm * ys,
                zp * (xs * c2 + ys * s2) - 2 * r * zs * c1 + zm * xs,
            ],
        ]
    )
    return 0.5 * f * A


def alpha_coefficients(
    f, sigma, tau, xs, ys, zs, r, theta, mirror: Mirror | str = Mirror.PLUS
) -> np.ndarray:
    """The 8x2 matrix ``A`` with ``A (cos a, sin a)^T = T - B`` for a normalized camera."""
    mirror = Mirror(mirror)
    if mirror is Mirror.MINUS and r > DEGENERATE_R:
        return _alpha_table_minus(f, sigma, tau, xs, ys, zs, r, theta)
    # the degenerate alternate mirror leaves rows 1, 2 of (2) equal to the
    # default mirror at r = 0, so the default table applies
    return _alpha_table_plus(f, sigma, tau, xs, ys, zs, r, theta)


def assemble_alpha_system(
    P,
    cand: IntrinsicCandidate,
    center,
    r: float,
    theta: float,
    mirror: Mirror | str = Mirror.PLUS,
) -> tuple[np.ndarray, np.ndarray]:
    """Build ``(A, rhs)`` for the normalized pinhole camera ``P``.

    ``rhs`` is the row-major flattening of the first two rows of ``P``
    minus the principal-point contribution ``(u, v) x third row``.
    """
    P = np.asarray(P, dtype=float)
    xs, ys, zs = (float(x) for x in np.asarray(center, dtype=float)[:3])
    w, _, _ = _z_plus_minus(r)
    ct, st = math.cos(theta), math.sin(theta)
    row3 = np.array([r * ct, r * st, w, -(w * zs + r * xs * ct + r * ys * st)])
    B = np.concatenate([cand.u * row3, cand.v * row3])
    T = P[:2].reshape(-1)
    A = alpha_coefficients(cand.f, cand.sigma, cand.tau, xs, ys, zs, r, theta, mirror)
    return A, T - B


def solve_alpha(A, rhs) -> tuple[float, float, float]:
    """Least-squares ``(cos a, sin a)`` via QR, plus the residual norm."""
    A = np.asarray(A, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[1] <= 1e-10 * sv[0]:
        raise RankDeficientSystem(f"alpha system has rank < 2 (singular values {sv})")
    Q, R = np.linalg.qr(A)
    x = np.linalg.solve(R, Q.T @ rhs)
    residual = float(np.linalg.norm(A @ x - rhs))
    return float(x[0]), float(x[1]), residual


def _focal_signs(focal_sign) -> list[FocalSign]:
    if focal_sign == "both":
        return [FocalSign.NEG, FocalSign.POS]
    return [FocalSign(focal_sign)]


def solve_intrinsics_kruppa(M, focal_sign: FocalSign | str = FocalSign.NEG) -> list[IntrinsicCandidate]:
    """Back-substitute the Kruppa matrix ``M M^T`` into intrinsic candidates.

    One candidate per (requested focal sign, sigma sign); positive sigma first.
    """
    M = np.asarray(M, dtype=float)
    K = M @ M.T
    k = K[2, 2]
    scale = np.trace(K)
    if not k > 1e-14 * scale:
        raise NotPinhole(f"(M M^T)_33 = {k:.3g} is not positive")
    u = K[0, 2] / k
    v = K[1, 2] / k
    f2 = K[1, 1] / k - v * v
    if not f2 > 1e-12 * (K[1, 1] / k):
        raise NotPinhole(f"f^2 = {f2:.3g} is not positive")
    tau = (K[0, 1] / k - u * v) / f2
    sigma2 = (K[0, 0] / k - u * u) / f2 - tau * tau
    if not sigma2 > 1e-12 * (K[0, 0] / k) / f2:
        raise NotPinhole(f"sigma^2 = {sigma2:.3g} is not positive")
    f_abs = math.sqrt(f2)
    sigma = math.sqrt(sigma2)
    out = []
    for fs in _focal_signs(focal_sign):
        for ss in (1.0, -1.0):
            out.append(IntrinsicCandidate(fs.sign * f_abs, ss * sigma, tau, u, v, k))
    return out


def _mirrors(mirror) -> list[Mirror]:
    if mirror == "both":
        return [Mirror.PLUS, Mirror.MINUS]
    return [Mirror(mirror)]


def reconstruction_residual(fac: PinholeLCFactors, P) -> float:
    """``||scale * compose - P||_F / ||P||_F``."""
    P = np.asarray(P, dtype=float)
    Q, _ = compose(fac)
    return float(np.linalg.norm(fac.scale * Q - P) / np.linalg.norm(P))


def lc_factorize_pinhole(
    P,
    mirror: Mirror | str = Mirror.PLUS,
    focal_sign: FocalSign | str = FocalSign.NEG,
    tol: float = DEFAULT_TOL,
    all_branches: bool = False,
) -> list[PinholeLCFactors]:
    """LC-factorize a pinhole camera.

    Parameters
    ----------
    P : array_like or CameraMatrix
        3x4 pinhole camera (left 3x3 block nonsingular), any scale.
    mirror : {"plus", "minus", "both"}
        Mirror-plane variant(s) to try.
    focal_sign : {"neg", "pos", "both"}
        Orientation(s) of the focal length to try.
    tol : float
        Acceptance tolerance for both ``|cos^2 + sin^2 - 1|`` and the
        relative reconstruction residual.
    all_branches : bool
        Try both mirrors and both focal signs; the requested ones come first.

    Returns
    -------
    list of PinholeLCFactors
        Accepted factorizations, ordered by (requested mirror, requested
        focal sign) first.

    Raises
    ------
    NotPinhole
        Input is not a pinhole camera or its Kruppa matrix is invalid.
    NoBranchAccepted
        No candidate branch reconstructs the camera.
    """
    cam = P if isinstance(P, CameraMatrix) else CameraMatrix.from_array(P)
    if cam.kind is not CameraKind.PINHOLE:
        raise NotPinhole(f"camera is {cam.kind.value}, not pinhole")
    source = cam.P
    Pn, nscale, _ = homgeom.normalized_with_scale(cam)

    mirrors = _mirrors(mirror)
    signs = _focal_signs(focal_sign)
    if all_branches:
        mirrors += [m for m in Mirror if m not in mirrors]
        signs += [s for s in FocalSign if s not in signs]

    center = -np.linalg.solve(Pn[:, :3], Pn[:, 3])
    n = Pn[2, :3]
    r = min(1.0, math.hypot(n[0], n[1]))
    theta = math.atan2(n[1], n[0]) if r > 0 else 0.0

    cands = []
    for fs in signs:
        cands.extend(solve_intrinsics_kruppa(Pn[:, :3], fs))

    accepted: list[PinholeLCFactors] = []
    best = math.inf
    for m in mirrors:
        for cand in cands:
            A, rhs = assemble_alpha_system(Pn, cand, center, r, theta, m)
            c, s, _ = solve_alpha(A, rhs)
            if abs(c * c + s * s - 1.0) > tol:
                continue
            fac = PinholeLCFactors(
                f=cand.f,
                sigma=cand.sigma,
                tau=cand.tau,
                u=cand.u,
                v=cand.v,
                alpha=math.atan2(s, c),
                xs=float(center[0]),
                ys=float(center[1]),
                zs=float(center[2]),
                r=r,
                theta=theta,
                mirror=m,
                scale=nscale * -cand.f,
            )
            res = reconstruction_residual(fac, source)
            best = min(best, res)
            if res <= tol:
                accepted.append(fac)
    if not accepted:
        raise NoBranchAccepted(
            f"no pinhole branch accepted (best reconstruction residual {best:.3g})"
        )
    return accepted


def with_parameters(fac: PinholeLCFactors, **changes) -> PinholeLCFactors:
    return replace(fac, **changes)
