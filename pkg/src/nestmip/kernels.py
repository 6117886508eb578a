"""Hot-loop dispatch: compiled Cython kernels when built, numpy otherwise.

Set ``NESTMIP_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("NESTMIP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def triple_unfeasible(ij_lo, ij_hi, iu_lo, iu_hi, ju_lo, ju_hi, eps=1e-9, impl=None):
    impl = impl or _impl
    return impl.triple_unfeasible(
        _f64(ij_lo), _f64(ij_hi), _f64(iu_lo), _f64(iu_hi), _f64(ju_lo), _f64(ju_hi), float(eps)
    ).astype(bool)


def points_in_convex(points, vertices, eps=1e-9, impl=None):
    impl = impl or _impl
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    v = np.asarray(vertices, dtype=np.float64)
    return impl.points_in_convex(
        _f64(pts[:, 0]), _f64(pts[:, 1]), _f64(v[:, 0]), _f64(v[:, 1]), float(eps)
    ).astype(bool)


def implementations():
    """All importable implementations keyed by name (for benchmarks/tests)."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        out["cython"] = _compiled
    return out
