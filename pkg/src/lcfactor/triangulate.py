"""Symmedian-point triangulation from LC factors.

Each observation is lifted to a projection line: its 3D image on the image
plane joined with the camera center (finite for pinhole cameras, the
projection direction for affine ones). The symmedian point minimizes the
sum of squared distances to all lines of a track.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .affine import AffineLCFactors, two2three_affine
from .errors import AllLinesParallel, ImagePointAtInfinity, NotUnit, ParallelLines
from .pinhole import PinholeLCFactors, two2three

UNIT_TOL = 1e-10
PARALLEL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Line3:
    """Line ``{X + t W}`` with unit direction ``W``."""

    X: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float).reshape(3)
        W = np.asarray(self.W, dtype=float).reshape(3)
        if abs(np.linalg.norm(W) - 1.0) > UNIT_TOL:
            raise NotUnit(f"line direction must be unit, |W| = {np.linalg.norm(W)!r}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "W", W)

    @classmethod
    def through(cls, X, direction) -> "Line3":
        """Line through ``X`` along ``direction`` (normalized here)."""
        d = np.asarray(direction, dtype=float).reshape(3)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("direction must be nonzero")
        return cls(X, d / n)


@dataclass(frozen=True, eq=False)
class SymmedianResult:
    X_star: np.ndarray
    distances: np.ndarray
    smallest_singular_value: float
    largest_singular_value: float = field(default=np.nan)

    @property
    def condition(self) -> float:
        return self.largest_singular_value / self.smallest_singular_value

    @property
    def objective(self) -> float:
        return float(np.sum(self.distances**2))


def line_projector(W) -> np.ndarray:
    """``I - W W^T``: the projector onto the plane normal to ``W``."""
    W = np.asarray(W, dtype=float).reshape(3)
    if abs(np.linalg.norm(W) - 1.0) > UNIT_TOL:
        raise NotUnit(f"direction must be unit, |W| = {np.linalg.norm(W)!r}")
    return np.eye(3) - np.outer(W, W)


def point_line_distance(X, line: Line3) -> float:
    d = np.asarray(X, dtype=float) - line.X
    return float(np.linalg.norm(d - (d @ line.W) * line.W))


def symmedian_point(lines) -> SymmedianResult:
    """Least-squares closest point to two or more lines.

    Solves ``(sum P_i) X = sum P_i X_i`` through a symmetric eigen solve.

    Raises
    ------
    AllLinesParallel
        When ``sum P_i`` is singular (smallest eigenvalue at most 1e-10 of
        the largest): all lines share one direction.
    """
    lines = list(lines)
    if len(lines) < 2:
        raise ValueError("symmedian point needs at least two lines")
    S = np.zeros((3, 3))
    b = np.zeros(3)
    for ln in lines:
        P = line_projector(ln.W)
        S += P
        b += P @ ln.X
    lam, V = np.linalg.eigh(S)
    if lam[0] <= PARALLEL_TOL * lam[2]:
        raise AllLinesParallel(
            f"all projection lines are parallel (eigenvalues {lam[0]:.3g}, {lam[2]:.3g})"
        )
    X = V @ ((V.T @ b) / lam)
    dist = np.array([point_line_distance(X, ln) for ln in lines])
    return SymmedianResult(X, dist, float(lam[0]), float(lam[2]))


def midpoint_two_view(l1: Line3, l2: Line3) -> np.ndarray:
    """Midpoint of the common perpendicular of two lines."""
    b = float(l1.W @ l2.W)
    den = 1.0 - b * b
    if den <= 1e-12:
        raise ParallelLines("lines are parallel; the common perpendicular is not unique")
    w0 = l1.X - l2.X
    d = float(l1.W @ w0)
    e = float(l2.W @ w0)
    s = (b * e - d) / den
    t = (e - b * d) / den
    return 0.5 * ((l1.X + s * l1.W) + (l2.X + t * l2.W))


def _dehomogenize(h) -> np.ndarray:
    if abs(h[3]) <= 1e-12 * np.linalg.norm(h):
        raise ImagePointAtInfinity("lifted 3D image point is at infinity")
    return h[:3] / h[3]


def line_from_pinhole(factors: PinholeLCFactors, uv) -> Line3:
    """Projection line of pixel ``uv``: its 3D image joined with the center."""
    x = np.array([uv[0], uv[1], 1.0])
    Xi = _dehomogenize(two2three(factors) @ x)
    return Line3.through(Xi, factors.center[:3] - Xi)


def line_from_affine(factors: AffineLCFactors, uv) -> Line3:
    """Projection line of pixel ``uv`` along the projection direction ``S``."""
    x = factors.E @ np.array([uv[0], uv[1], 1.0])
    Xi = _dehomogenize(two2three_affine(factors) @ x)
    return Line3.through(Xi, factors.normal)


def line_from_factors(factors, uv) -> Line3:
    if isinstance(factors, PinholeLCFactors):
        return line_from_pinhole(factors, uv)
    if isinstance(factors, AffineLCFactors):
        return line_from_affine(factors, uv)
    raise TypeError(f"unsupported factor type {type(factors).__name__}")


def symmedian_batch(tracks, backend: str | None = None) -> list[SymmedianResult | AllLinesParallel]:
    """Triangulate many tracks at once with the batch kernels.

    Parameters
    ----------
    tracks : sequence of sequence of Line3
        Each track needs at least two lines.
    backend : {"cython", "python"}, optional
        Kernel implementation; defaults to :data:`lcfactor.kernels.BACKEND`.

    Returns
    -------
    list
        Per track, a :class:`SymmedianResult` or the :class:`AllLinesParallel`
        error describing why it failed. Input order is preserved.
    """
    tracks = [list(t) for t in tracks]
    if any(len(t) < 2 for t in tracks):
        raise ValueError("every track needs at least two lines")
    if not tracks:
        return []
    anchors = np.array([ln.X for t in tracks for ln in t])
    dirs = np.array([ln.W for t in tracks for ln in t])
    offsets = np.concatenate([[0], np.cumsum([len(t) for t in tracks])])
    X, lmin, lmax, ok = kernels.symmedian_batch(anchors, dirs, offsets, PARALLEL_TOL, backend)
    dist = kernels.line_distances(np.where(ok[:, None], X, 0.0), anchors, dirs, offsets, backend)
    out: list[SymmedianResult | AllLinesParallel] = []
    for i in range(len(tracks)):
        if ok[i]:
            d = dist[offsets[i] : offsets[i + 1]].copy()
            out.append(SymmedianResult(X[i].copy(), d, float(lmin[i]), float(lmax[i])))
        else:
            out.append(
                AllLinesParallel(
                    f"all projection lines are parallel (eigenvalues {lmin[i]:.3g}, {lmax[i]:.3g})"
                )
            )
    return out
