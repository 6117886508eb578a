import numpy as np
import pytest
from scipy.optimize import linprog

from nestmip.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, solve_lp


def test_simple_optimum():
    # min -x - y  s.t. x + 2y <= 4, 3x + y <= 6
    r = solve_lp([-1, -1], [[1, 2], [3, 1]], [4, 6])
    assert r.status == OPTIMAL
    assert r.objective == pytest.approx(-2.8)
    assert np.allclose(r.x, [1.6, 1.2])


def test_infeasible():
    r = solve_lp([1], A_ub=[[-1], [1]], b_ub=[-1, 0])
    assert r.status == INFEASIBLE


def test_unbounded():
    r = solve_lp([-1, 0], A_ub=[[0, 1]], b_ub=[1])
    assert r.status == UNBOUNDED


def test_bounds_and_equalities():
    r = solve_lp([1, 1], A_eq=[[1, -1]], b_eq=[0.5], lo=[1, -2], hi=[3, 2])
    assert r.status == OPTIMAL
    assert r.x == pytest.approx([1.0, 0.5])


def test_degenerate_cycling_example_terminates():
    # Beale's example cycles under the textbook largest-coefficient rule
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    r = solve_lp(c, A, [0, 0, 1])
    assert r.status == OPTIMAL
    assert r.objective == pytest.approx(-0.05)


@pytest.mark.parametrize("seed", range(200))
def test_matches_scipy_and_certificate(seed):
    rng = np.random.default_rng(seed)
    n, m, k = rng.integers(1, 6), rng.integers(0, 6), rng.integers(0, 3)
    c = rng.normal(size=n)
    A = rng.normal(size=(m, n)) if m else None
    b = rng.normal(size=m) + 1.0 if m else None
    Ae = rng.normal(size=(k, n)) if k else None
    be = rng.normal(size=k) if k else None
    lo = rng.uniform(-3, 0, n)
    hi = lo + rng.uniform(0, 4, n)
    ours = solve_lp(c, A, b, Ae, be, lo, hi)
    ref = linprog(c, A, b, Ae, be, bounds=list(zip(lo, hi)), method="highs")
    if ref.status == 2:
        assert ours.status == INFEASIBLE
        return
    assert ref.status == 0
    assert ours.status == OPTIMAL
    assert ours.objective == pytest.approx(ref.fun, abs=1e-7, rel=1e-7)
    assert max(ours.certificate().values()) <= 1e-8
