"""Pure numpy fallback for the hot loops (same signatures as ``_kernels``)."""
import numpy as np


def triple_unfeasible(ij_lo, ij_hi, iu_lo, iu_hi, ju_lo, ju_hi, eps):
    """Mask ``[a, b, c]`` set where the interval test finds no common x.

    ``a`` indexes regions of (i, j), ``b`` regions of (i, u) and ``c`` regions
    of (j, u).  The sum ``x_ij + x_ju`` is intersected with ``x_iu``.
    """
    slo = ij_lo[:, None, None] + ju_lo[None, None, :]
    shi = ij_hi[:, None, None] + ju_hi[None, None, :]
    lo = iu_lo[None, :, None]
    hi = iu_hi[None, :, None]
    return ((shi < lo - eps) | (hi < slo - eps)).astype(np.uint8)


def points_in_convex(px, py, vx, vy, eps):
    ex = np.roll(vx, -1) - vx
    ey = np.roll(vy, -1) - vy
    norm = np.hypot(ex, ey)
    d = (ex[None, :] * (py[:, None] - vy[None, :]) - ey[None, :] * (px[:, None] - vx[None, :]))
    d /= norm[None, :]
    return np.all(d >= -eps, axis=1).astype(np.uint8)
