# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernels for symmedian triangulation.

Same contract as ``_pykernels``: flat (N, 3) anchors and unit directions,
track ``t`` owning rows ``offsets[t]:offsets[t + 1]``.
"""

import numpy as np

from libc.math cimport sqrt, NAN


cdef void _jacobi3(double[3][3] A, double[3] lam, double[3][3] V) noexcept nogil:
    """Cyclic Jacobi eigen solve of a symmetric 3x3 matrix (A is overwritten)."""
    cdef int i, j, p, q, k, sweep
    cdef double off, scale, theta, t, c, s, app, aqq, apq, akp, akq, vkp, vkq
    for i in range(3):
        for j in range(3):
            V[i][j] = 1.0 if i == j else 0.0
    for sweep in range(60):
        off = A[0][1] * A[0][1] + A[0][2] * A[0][2] + A[1][2] * A[1][2]
        scale = A[0][0] * A[0][0] + A[1][1] * A[1][1] + A[2][2] * A[2][2]
        if off <= 1e-36 * scale:
            break
        for p in range(2):
            for q in range(p + 1, 3):
                apq = A[p][q]
                if apq == 0.0:
                    continue
                app = A[p][p]
                aqq = A[q][q]
                theta = (aqq - app) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + sqrt(1.0 + theta * theta))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for k in range(3):
                    if k != p and k != q:
                        akp = A[k][p]
                        akq = A[k][q]
                        A[k][p] = c * akp - s * akq
                        A[p][k] = A[k][p]
                        A[k][q] = s * akp + c * akq
                        A[q][k] = A[k][q]
                A[p][p] = app - t * apq
                A[q][q] = aqq + t * apq
                A[p][q] = 0.0
                A[q][p] = 0.0
                for k in range(3):
                    vkp = V[k][p]
                    vkq = V[k][q]
                    V[k][p] = c * vkp - s * vkq
                    V[k][q] = s * vkp + c * vkq
    for i in range(3):
        lam[i] = A[i][i]


def symmedian_batch(anchors, dirs, offsets, double rel_tol=1e-10):
    cdef double[:, ::1] a = np.ascontiguousarray(anchors, dtype=np.float64)
    cdef double[:, ::1] w = np.ascontiguousarray(dirs, dtype=np.float64)
    cdef Py_ssize_t[::1] off = np.ascontiguousarray(offsets, dtype=np.intp)
    cdef Py_ssize_t T = off.shape[0] - 1
    out = np.empty((T, 3))
    lmin_arr = np.empty(T)
    lmax_arr = np.empty(T)
    ok_arr = np.zeros(T, dtype=np.uint8)
    cdef double[:, ::1] X = out
    cdef double[::1] lmin = lmin_arr
    cdef double[::1] lmax = lmax_arr
    cdef unsigned char[::1] ok = ok_arr
    cdef double[3][3] S
    cdef double[3][3] V
    cdef double[3] lam
    cdef double[3] b
    cdef double wa, lo, hi, coef
    cdef Py_ssize_t t, n, i, j, k
    with nogil:
        for t in range(T):
            for i in range(3):
                b[i] = 0.0
                for j in range(3):
                    S[i][j] = 0.0
            for n in range(off[t], off[t + 1]):
                wa = w[n, 0] * a[n, 0] + w[n, 1] * a[n, 1] + w[n, 2] * a[n, 2]
                for i in range(3):
                    # P a = a - w (w . a)
                    b[i] += a[n, i] - w[n, i] * wa
                    for j in range(3):
                        S[i][j] -= w[n, i] * w[n, j]
                    S[i][i] += 1.0
            _jacobi3(S, lam, V)
            lo = lam[0]
            hi = lam[0]
            for k in range(1, 3):
                if lam[k] < lo:
                    lo = lam[k]
                if lam[k] > hi:
                    hi = lam[k]
            lmin[t] = lo
            lmax[t] = hi
            if lo > rel_tol * hi:
                ok[t] = 1
                for i in range(3):
                    X[t, i] = 0.0
                for k in range(3):
                    coef = (V[0][k] * b[0] + V[1][k] * b[1] + V[2][k] * b[2]) / lam[k]
                    for i in range(3):
                        X[t, i] += V[i][k] * coef
            else:
                for i in range(3):
                    X[t, i] = NAN
    return out, lmin_arr, lmax_arr, ok_arr.astype(bool)


def line_distances(Xt, anchors, dirs, offsets):
    cdef double[:, ::1] X = np.ascontiguousarray(Xt, dtype=np.float64)
    cdef double[:, ::1] a = np.ascontiguousarray(anchors, dtype=np.float64)
    cdef double[:, ::1] w = np.ascontiguousarray(dirs, dtype=np.float64)
    cdef Py_ssize_t[::1] off = np.ascontiguousarray(offsets, dtype=np.intp)
    cdef Py_ssize_t T = off.shape[0] - 1
    out = np.empty(a.shape[0])
    cdef double[::1] dist = out
    cdef double d0, d1, d2, proj
    cdef Py_ssize_t t, n
    with nogil:
        for t in range(T):
            for n in range(off[t], off[t + 1]):
                d0 = X[t, 0] - a[n, 0]
                d1 = X[t, 1] - a[n, 1]
                d2 = X[t, 2] - a[n, 2]
                proj = d0 * w[n, 0] + d1 * w[n, 1] + d2 * w[n, 2]
                d0 -= proj * w[n, 0]
                d1 -= proj * w[n, 1]
                d2 -= proj * w[n, 2]
                dist[n] = sqrt(d0 * d0 + d1 * d1 + d2 * d2)
    return out
