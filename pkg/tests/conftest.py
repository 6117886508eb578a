import os
import shutil

import pytest

from nestmip import bundled_instances
from nestmip.instance import build_instance, load_instance

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def have_backend():
    """The default backend needs scipy's MILP interface."""
    try:
        from scipy.optimize import milp  # noqa: F401
    except ImportError:
        return False
    return True


needs_backend = pytest.mark.skipif(not have_backend(), reason="scipy.optimize.milp not available")


@pytest.fixture(scope="session")
def synthetic():
    return [load_instance(p) for p in bundled_instances()]


@pytest.fixture
def two_squares():
    return build_instance("two_squares", 1.0, [("sq", SQUARE, 2)])


def square_instance(H, n=2):
    return build_instance(f"sq{n}_h{H:g}", H, [("sq", SQUARE, n)])
