"""Pure numpy batch kernels for symmedian triangulation.

Lines are stored flat: ``anchors`` and ``dirs`` of shape (N, 3), track ``t``
owning rows ``offsets[t]:offsets[t + 1]``. Every track must own at least
one line.
"""

from __future__ import annotations

import numpy as np


def _track_index(offsets: np.ndarray) -> np.ndarray:
    return np.repeat(np.arange(len(offsets) - 1), np.diff(offsets))


def symmedian_batch(anchors, dirs, offsets, rel_tol: float = 1e-10):
    """Solve ``(sum P_i) X = sum P_i X_i`` for every track.

    Returns
    -------
    X : ndarray, shape (T, 3)
        NaN rows where the track is singular.
    lam_min, lam_max : ndarray, shape (T,)
        Extreme eigenvalues of ``sum P_i``.
    ok : ndarray of bool, shape (T,)
    """
    a = np.ascontiguousarray(anchors, dtype=float)
    w = np.ascontiguousarray(dirs, dtype=float)
    off = np.asarray(offsets, dtype=np.intp)
    eye = np.eye(3)
    P = eye - w[:, :, None] * w[:, None, :]
    Pb = np.einsum("nij,nj->ni", P, a)
    starts = off[:-1]
    S = np.add.reduceat(P, starts, axis=0)
    b = np.add.reduceat(Pb, starts, axis=0)
    lam, V = np.linalg.eigh(S)
    lam_min, lam_max = lam[:, 0], lam[:, 2]
    ok = lam_min > rel_tol * lam_max
    safe = np.where(ok[:, None], lam, 1.0)
    coef = np.einsum("tji,tj->ti", V, b) / safe
    X = np.einsum("tij,tj->ti", V, coef)
    X[~ok] = np.nan
    return X, lam_min, lam_max, ok


def line_distances(X, anchors, dirs, offsets):
    """Distance from each line to the point of its track, shape (N,)."""
    a = np.asarray(anchors, dtype=float)
    w = np.asarray(dirs, dtype=float)
    idx = _track_index(np.asarray(offsets, dtype=np.intp))
    d = np.asarray(X, dtype=float)[idx] - a
    perp = d - np.sum(d * w, axis=1)[:, None] * w
    return np.sqrt(np.sum(perp * perp, axis=1))
