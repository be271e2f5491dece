"""LC factorization of affine and general linear cameras.

An affine camera (third row ``(0, 0, 0, 1)``) is written as

    P ~ (6)(5)(4)(3)(2)(1)(0)

with (0) the orthographic parallel projection along ``S`` onto the plane
``pi`` through the origin (``S = pi = (n, 0)``), (1) the orthographic
mirror taking ``pi`` onto ``xoy``, (2) the ``xoy`` cutting matrix, (3) a 2D
rotation by ``alpha``, (4) ``diag(sigma, rho, 1)``, (5) skew ``tau`` and
(6) the principal point. Factor (0) can be dropped without changing the
product.

General linear cameras (left 3x3 block of rank 2, third row not at
infinity) are first reduced to affine form by elementary row operations.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import homgeom
from .errors import DegenerateAffine, NoBranchAccepted, NotAffine, NotReducible
from .homgeom import CameraKind, CameraMatrix
from .pinhole import DEFAULT_TOL, DEGENERATE_R, Mirror, _z_plus_minus, solve_alpha

# row permutations tried, in order, before the (lambda1, lambda2) solve
_PERMUTATIONS = {
    None: (0, 1, 2),
    "swap23": (0, 2, 1),
    "swap13": (2, 1, 0),
}
_REDUCE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GeneralLinearNormalization:
    """Row reduction ``P_affine = E @ P`` of a general linear camera.

    ``E = diag(1, 1, 1/a) @ L(lambda1, lambda2) @ Perm``, with ``a`` the
    (3, 4) entry after elimination.
    """

    lambda1: float
    lambda2: float
    row_permutation: str | None
    P_affine: CameraMatrix
    E: np.ndarray

    def restore(self, P_affine) -> np.ndarray:
        """Map an affine-form matrix back to the original camera frame."""
        return np.linalg.solve(self.E, np.asarray(P_affine, dtype=float))


def normalize_general_to_affine(P) -> GeneralLinearNormalization:
    """Reduce a general linear (or affine) camera to affine normal form.

    Raises
    ------
    NotReducible
        When no row order admits ``row3 + l1 row1 + l2 row2`` with zero
        left block, i.e. the left 3x3 block does not have rank 2.
    """
    A = homgeom._as_camera_array(P)
    homgeom.classify_camera(A)  # rank guard
    scale = np.linalg.norm(A[:, :3])
    for name, order in _PERMUTATIONS.items():
        Q = A[list(order)]
        M12 = Q[:2, :3].T  # 3x2
        sv = np.linalg.svd(M12, compute_uv=False)
        if sv[1] <= _REDUCE_TOL * sv[0]:
            continue
        lam, *_ = np.linalg.lstsq(M12, -Q[2, :3], rcond=None)
        row3 = Q[2] + lam[0] * Q[0] + lam[1] * Q[1]
        if np.linalg.norm(row3[:3]) > _REDUCE_TOL * scale:
            continue
        a = row3[3]
        if a == 0:
            continue
        L = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [lam[0], lam[1], 1.0]])
        E = np.diag([1.0, 1.0, 1.0 / a]) @ L @ np.eye(3)[list(order)]
        Pa = E @ A
        Pa[2] = (0.0, 0.0, 0.0, 1.0)
        return GeneralLinearNormalization(
            float(lam[0]) + 0.0, float(lam[1]) + 0.0, name, CameraMatrix(Pa, CameraKind.AFFINE), E
        )
    raise NotReducible("left 3x3 block is not of rank 2; no row reduction to affine form")


@dataclass(frozen=True)
class AffineIntrinsicCandidate:
    u: float
    v: float
    tau: float
    sigma: float
    rho: float


_FLOAT_FIELDS = ("u", "v", "sigma", "rho", "tau", "alpha", "r", "theta", "scale")


@dataclass(frozen=True)
class AffineLCFactors:
    """Parameters of one affine LC factorization.

    The source camera equals ``E^{-1} (scale * compose_affine(self)[0])``
    where ``E`` is :attr:`row_transform` (identity for affine input).
    """

    u: float
    v: float
    sigma: float
    rho: float
    tau: float
    alpha: float
    r: float
    theta: float
    mirror: Mirror = Mirror.PLUS
    scale: float = 1.0
    row_transform: tuple | None = None

    def __post_init__(self):
        for name in _FLOAT_FIELDS:
            object.__setattr__(self, name, float(getattr(self, name)) + 0.0)
        object.__setattr__(self, "mirror", Mirror(self.mirror))
        if self.row_transform is not None:
            E = np.asarray(self.row_transform, dtype=float)
            object.__setattr__(self, "row_transform", tuple(map(tuple, E.tolist())))
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")
        if self.sigma == 0 or self.rho == 0:
            raise ValueError("sigma and rho must be nonzero")

    @property
    def E(self) -> np.ndarray:
        if self.row_transform is None:
            return np.eye(3)
        return np.array(self.row_transform)

    @property
    def normal(self) -> np.ndarray:
        w, _, _ = _z_plus_minus(self.r)
        return np.array([self.r * math.cos(self.theta), self.r * math.sin(self.theta), w])

    @property
    def direction(self) -> np.ndarray:
        """(S) = (pi): projection direction and image plane, both ``(n, 0)``."""
        return np.append(self.normal, 0.0)

    @property
    def mirror_degenerate(self) -> bool:
        return self.mirror is Mirror.MINUS and self.r <= DEGENERATE_R

    @property
    def mirror_plane(self) -> np.ndarray:
        _, zp, zm = _z_plus_minus(self.r)
        n = self.normal
        return np.array([n[0], n[1], zp if self.mirror is Mirror.PLUS else zm, 0.0])

    @property
    def cos_alpha(self) -> float:
        return math.cos(self.alpha)

    @property
    def sin_alpha(self) -> float:
        return math.sin(self.alpha)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mirror"] = self.mirror.value
        if self.row_transform is not None:
            out["row_transform"] = [list(r) for r in self.row_transform]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AffineLCFactors":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


def _reflection_factor(fac: AffineLCFactors) -> np.ndarray:
    if fac.mirror_degenerate:
        # pi already is xoy and the alternate bisector is undefined
        return np.eye(4)
    return homgeom.reflection_operator(fac.mirror_plane, fac.mirror_plane)


def factor_matrices_affine(fac: AffineLCFactors) -> dict[int, np.ndarray]:
    """Matrices (0)..(6) keyed by their number."""
    ca, sa = fac.cos_alpha, fac.sin_alpha
    S = fac.direction
    return {
        0: homgeom.projection_operator(S, S),
        1: _reflection_factor(fac),
        2: homgeom.cutting_matrix(homgeom.AxisPlane.XOY),
        3: np.array([[ca, sa, 0.0], [-sa, ca, 0.0], [0.0, 0.0, 1.0]]),
        4: np.diag([fac.sigma, fac.rho, 1.0]),
        5: np.array([[1.0, fac.tau, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
        6: np.array([[1.0, 0.0, fac.u], [0.0, 1.0, fac.v], [0.0, 0.0, 1.0]]),
    }


def compose_affine(
    fac: AffineLCFactors, include_projection: bool = True
) -> tuple[np.ndarray, dict[int, np.ndarray]]:
    """Product (6)...(0) (affine normal form) and the individual factors.

    ``include_projection=False`` drops (0); the product is unchanged.
    """
    mats = factor_matrices_affine(fac)
    P = mats[0] if include_projection else np.eye(4)
    for i in range(1, 7):
        P = mats[i] @ P
    return P, mats


def reconstruct_affine(fac: AffineLCFactors) -> np.ndarray:
    """The source camera: ``E^{-1} (scale * product)``."""
    Q, _ = compose_affine(fac)
    Q = fac.scale * Q
    if fac.row_transform is None:
        return Q
    return np.linalg.solve(fac.E, Q)


def three2two_affine(fac: AffineLCFactors) -> np.ndarray:
    """(6)...(1): 3D image points on ``pi`` -> homogeneous pixels (affine frame)."""
    mats = factor_matrices_affine(fac)
    T = mats[1]
    for i in range(2, 7):
        T = mats[i] @ T
    return T


def two2three_affine(fac: AffineLCFactors) -> np.ndarray:
    """Inverse of :func:`three2two_affine` on the image plane ``pi``.

    Pixels here are in the affine normal frame; for general linear cameras
    apply :attr:`AffineLCFactors.E` to pixels first.
    """
    ca, sa = fac.cos_alpha, fac.sin_alpha
    chain = [
        _reflection_factor(fac),  # involution
        homgeom.augmenting_matrix(homgeom.AxisPlane.XOY),
        np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]]),
        np.diag([1.0 / fac.sigma, 1.0 / fac.rho, 1.0]),
        np.array([[1.0, -fac.tau, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
        np.array([[1.0, 0.0, -fac.u], [0.0, 1.0, -fac.v], [0.0, 0.0, 1.0]]),
    ]
    T = chain[-1]
    for m in reversed(chain[:-1]):
        T = m @ T
    return T


# --------------------------------------------------------------------------
# closed-form alpha system


def _alpha_table_plus(sigma, rho, tau, r, theta) -> np.ndarray:
    _, zp, zm = _z_plus_minus(r)
    c1, s1 = math.cos(theta), math.sin(theta)
    c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
    rt = rho * tau
    A = np.array(
        [
            [zp * sigma + zm * (sigma * c2 + rt * s2), zm * (sigma * s2 - rt * c2) - zp * rt],
            [zp * rt + zm * (sigma * s2 - rt * c2), zp * sigma - zm * (sigma * c2 + rt * s2)],
            [-2 * r * (sigma * c1 + rt * s1), 2 * r * (rt * c1 - sigma * s1)],
            [zm * rho * s2, -rho * (zm * c2 + zp)],
            [rho * (zp - zm * c2), -zm * rho * s2],
            [-2 * r * rho * s1, 2 * r * rho * c1],
        ]
    )
    return 0.5 * A


def _alpha_table_minus(sigma, rho, tau, r, theta) -> np.ndarray:
    # Commonly printed as the default-mirror table. Direct composition shows
    # it belongs to the alternate mirror, and entry (2, 1) has cos(2 theta)
    # on the rho*tau term inside the z+ bracket rather than on the z- term.
    _, zp, zm = _z_plus_minus(r)
    c1, s1 = math.cos(theta), math.sin(theta)
    c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
    rt = rho * tau
    A = np.array(
        [
            [-zm * sigma - zp * (sigma * c2 + rt * s2), zm * rt + zp * (rt * c2 - sigma * s2)],
            [zp * (rt * c2 - sigma * s2) - zm * rt, zp * (sigma * c2 + rt * s2) - zm * sigma],
            [2 * r * (sigma * c1 + rt * s1), 2 * r * (sigma * s1 - rt * c1)],
            [-zp * rho * s2, rho * (zm + zp * c2)],
            [rho * (zp * c2 - zm), zp * rho * s2],
            [2 * r * rho * s1, -2 * r * rho * c1],
        ]
    )
    return 0.5 * A


def alpha_coefficients_affine(
    sigma, rho, tau, r, theta, mirror: Mirror | str = Mirror.PLUS
) -> np.ndarray:
    """The 6x2 matrix ``A`` with ``A (cos a, sin a)^T = B`` (upper-left 2x3 block)."""
    mirror = Mirror(mirror)
    if mirror is Mirror.MINUS and r > DEGENERATE_R:
        return _alpha_table_minus(sigma, rho, tau, r, theta)
    # at r = 0 the identity mirror and the default mirror agree after the cut
    return _alpha_table_plus(sigma, rho, tau, r, theta)


def assemble_alpha_system_affine(
    P, cand: AffineIntrinsicCandidate, r: float, theta: float, mirror: Mirror | str = Mirror.PLUS
) -> tuple[np.ndarray, np.ndarray]:
    """``(A, rhs)`` for an affine camera in normal form; ``rhs`` flattens ``P[:2, :3]``."""
    P = np.asarray(P, dtype=float)
    A = alpha_coefficients_affine(cand.sigma, cand.rho, cand.tau, r, theta, mirror)
    return A, P[:2, :3].reshape(-1).copy()


def solve_intrinsics_affine(P) -> list[AffineIntrinsicCandidate]:
    """Back-substitute ``P P^T`` of an affine normal-form camera.

    Returns the ``rho > 0`` and ``rho < 0`` candidates (``sigma > 0``).
    """
    P = np.asarray(P, dtype=float)
    K = P @ P.T
    u, v = K[0, 2], K[1, 2]
    rho2 = K[1, 1] - v * v
    if not rho2 > 1e-12 * K[1, 1]:
        raise DegenerateAffine(f"rho^2 = {rho2:.3g} is not positive")
    tau = (K[0, 1] - u * v) / rho2
    sigma2 = K[0, 0] - u * u - rho2 * tau * tau
    if not sigma2 > 1e-12 * K[0, 0]:
        raise DegenerateAffine(f"sigma^2 = {sigma2:.3g} is not positive")
    sigma, rho = math.sqrt(sigma2), math.sqrt(rho2)
    return [AffineIntrinsicCandidate(u, v, tau, sigma, s * rho) for s in (1.0, -1.0)]


def _image_normal(P) -> tuple[float, float]:
    """``(r, theta)`` from the null direction of the left block, ``n3 >= 0``."""
    n = np.cross(P[0, :3], P[1, :3])
    n = n / np.linalg.norm(n)
    if n[2] < 0 or (n[2] == 0 and n[np.flatnonzero(n)[0]] < 0):
        n = -n
    r = min(1.0, math.hypot(n[0], n[1]))
    theta = math.atan2(n[1], n[0]) if r > 0 else 0.0
    return r, theta


def _mirrors(mirror) -> list[Mirror]:
    if mirror == "both":
        return [Mirror.PLUS, Mirror.MINUS]
    return [Mirror(mirror)]


def reconstruction_residual_affine(fac: AffineLCFactors, P) -> float:
    P = np.asarray(P, dtype=float)
    return float(np.linalg.norm(reconstruct_affine(fac) - P) / np.linalg.norm(P))


def lc_factorize_affine(
    P,
    mirror: Mirror | str = Mirror.PLUS,
    tol: float = DEFAULT_TOL,
    all_branches: bool = False,
) -> list[AffineLCFactors]:
    """LC-factorize an affine or general linear camera.

    Parameters
    ----------
    P : array_like or CameraMatrix
        3x4 camera of kind affine or general linear.
    mirror : {"plus", "minus", "both"}
    tol : float
        Acceptance tolerance (trig identity and relative reconstruction).
    all_branches : bool
        Also try the other mirror after the requested one.

    Returns
    -------
    list of AffineLCFactors
        Accepted branches; general linear input carries its row transform.
    """
    cam = P if isinstance(P, CameraMatrix) else CameraMatrix.from_array(P)
    source = cam.P
    if cam.kind is CameraKind.PINHOLE:
        raise NotAffine("camera is pinhole; use lc_factorize_pinhole")
    if cam.kind is CameraKind.AFFINE:
        Pa, scale, _ = homgeom.normalized_with_scale(cam)
        E = None
    else:
        red = normalize_general_to_affine(cam)
        Pa, scale, E = red.P_affine.P, 1.0, red.E

    mirrors = _mirrors(mirror)
    if all_branches:
        mirrors += [m for m in Mirror if m not in mirrors]

    r, theta = _image_normal(Pa)
    cands = solve_intrinsics_affine(Pa)
    accepted: list[AffineLCFactors] = []
    best = math.inf
    for m in mirrors:
        for cand in cands:
            A, rhs = assemble_alpha_system_affine(Pa, cand, r, theta, m)
            c, s, _ = solve_alpha(A, rhs)
            if abs(c * c + s * s - 1.0) > tol:
                continue
            fac = AffineLCFactors(
                u=cand.u,
                v=cand.v,
                sigma=cand.sigma,
                rho=cand.rho,
                tau=cand.tau,
                alpha=math.atan2(s, c),
                r=r,
                theta=theta,
                mirror=m,
                scale=scale,
                row_transform=E,
            )
            res = reconstruction_residual_affine(fac, source)
            best = min(best, res)
            if res <= tol:
                accepted.append(fac)
    if not accepted:
        raise NoBranchAccepted(
            f"no affine branch accepted (best reconstruction residual {best:.3g})"
        )
    return accepted
