# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the inner loops in :mod:`nestmip._kernels_py`."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def triple_unfeasible(double[::1] ij_lo, double[::1] ij_hi,
                      double[::1] iu_lo, double[::1] iu_hi,
                      double[::1] ju_lo, double[::1] ju_hi,
                      double eps):
    cdef Py_ssize_t a, b, c
    cdef Py_ssize_t na = ij_lo.shape[0], nb = iu_lo.shape[0], nc = ju_lo.shape[0]
    cdef double slo, shi
    out = np.zeros((na, nb, nc), dtype=np.uint8)
    cdef cnp.uint8_t[:, :, ::1] res = out
    for a in range(na):
        for c in range(nc):
            slo = ij_lo[a] + ju_lo[c]
            shi = ij_hi[a] + ju_hi[c]
            for b in range(nb):
                if shi < iu_lo[b] - eps or iu_hi[b] < slo - eps:
                    res[a, b, c] = 1
    return out


def points_in_convex(double[::1] px, double[::1] py,
                     double[::1] vx, double[::1] vy, double eps):
    cdef Py_ssize_t n = px.shape[0], m = vx.shape[0], p, k, k1
    cdef double ex, ey, norm, d
    cdef bint inside
    out = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] res = out
    norms = np.empty(m, dtype=np.float64)
    cdef double[::1] nrm = norms
    for k in range(m):
        k1 = (k + 1) % m
        ex = vx[k1] - vx[k]
        ey = vy[k1] - vy[k]
        nrm[k] = (ex * ex + ey * ey) ** 0.5
    for p in range(n):
        inside = True
        for k in range(m):
            k1 = (k + 1) % m
            ex = vx[k1] - vx[k]
            ey = vy[k1] - vy[k]
            d = (ex * (py[p] - vy[k]) - ey * (px[p] - vx[k])) / nrm[k]
            if d < -eps:
                inside = False
                break
        if inside:
            res[p] = 1
    return out
