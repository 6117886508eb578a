"""Dense two-phase primal simplex with Bland's rule.

Meant for the residual LPs of the enumerator (a handful of variables and a few
dozen rows), where a textbook tableau is plenty fast and easy to audit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None = None
    objective: float = float("nan")
    iterations: int = 0
    # standard-form data kept for the optimality certificate
    A_std: np.ndarray | None = None
    b_std: np.ndarray | None = None
    c_std: np.ndarray | None = None
    x_std: np.ndarray | None = None
    y_std: np.ndarray | None = None

    def certificate(self) -> dict:
        """Residuals of primal feasibility, dual feasibility and complementarity."""
        A, b, c, x, y = self.A_std, self.b_std, self.c_std, self.x_std, self.y_std
        red = c - A.T @ y
        return {
            "primal": float(np.max(np.abs(A @ x - b), initial=0.0)),
            "dual": float(max(0.0, -np.min(red, initial=0.0))),
            "complementarity": float(np.max(np.abs(red * x), initial=0.0)),
            "duality_gap": float(abs(c @ x - b @ y)),
        }


class _Tableau:
    def __init__(self, T, basis, tol):
        self.T = T
        self.basis = basis
        self.tol = tol
        self.iterations = 0

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed):
        """Minimise the objective row; returns False when unbounded."""
        T, tol = self.T, self.tol
        m = T.shape[0] - 1
        while True:
            cost = T[-1, :-1]
            enter = next((j for j in allowed if cost[j] < -tol), None)
            if enter is None:
                return True
            colj = T[:m, enter]
            best = None
            for r in range(m):
                if colj[r] > tol:
                    ratio = T[r, -1] / colj[r]
                    key = (ratio, self.basis[r])
                    if best is None or key[0] < best[0][0] - tol or (
                        abs(key[0] - best[0][0]) <= tol and key[1] < best[0][1]
                    ):
                        best = (key, r)
            if best is None:
                return False
            self.pivot(best[1], enter)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lo=None, hi=None, tol=1e-9) -> LpResult:
    """Minimise ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``,
    ``lo <= x <= hi``.  Lower bounds must be finite."""
    c = np.asarray(c, dtype=float)
    n = c.size
    lo = np.zeros(n) if lo is None else np.asarray(lo, dtype=float)
    hi = np.full(n, np.inf) if hi is None else np.asarray(hi, dtype=float)
    if not np.all(np.isfinite(lo)):
        raise ValueError("lower bounds must be finite")
    if np.any(lo > hi + tol):
        return LpResult(INFEASIBLE)
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)

    # shift x = lo + x', upper bounds become rows
    fin = np.isfinite(hi)
    A1 = np.vstack([A_ub, np.eye(n)[fin]])
    b1 = np.concatenate([b_ub - A_ub @ lo, (hi - lo)[fin]])
    b2 = b_eq - A_eq @ lo
    m1, m2 = A1.shape[0], A_eq.shape[0]
    m = m1 + m2
    # standard form [A1 I; A_eq 0] [x'; s] = b
    A_std = np.zeros((m, n + m1))
    A_std[:m1, :n] = A1
    A_std[:m1, n:] = np.eye(m1)
    A_std[m1:, :n] = A_eq
    b_std = np.concatenate([b1, b2])
    c_std = np.concatenate([c, np.zeros(m1)])
    nv = n + m1

    sign = np.where(b_std < 0, -1.0, 1.0)
    need_art = [r for r in range(m) if r >= m1 or sign[r] < 0]
    na = len(need_art)
    T = np.zeros((m + 1, nv + na + 1))
    T[:m, :nv] = A_std * sign[:, None]
    T[:m, -1] = b_std * sign
    basis = [0] * m
    for r in range(m1):
        basis[r] = n + r
    for a, r in enumerate(need_art):
        T[r, nv + a] = 1.0
        basis[r] = nv + a
    tab = _Tableau(T, basis, tol)

    # phase 1
    if na:
        for r in need_art:
            T[-1] -= T[r]
        T[-1, nv:nv + na] = 0.0
        tab.run(range(nv + na))
        if T[-1, -1] < -tol * max(1.0, np.abs(b_std).max(initial=0.0)):
            return LpResult(INFEASIBLE, iterations=tab.iterations)
        # drive artificials out of the basis; rows that cannot be pivoted are redundant
        drop = []
        for r in range(m):
            if tab.basis[r] >= nv:
                j = next((j for j in range(nv) if abs(T[r, j]) > tol), None)
                if j is None:
                    drop.append(r)
                else:
                    tab.pivot(r, j)
        keep = [r for r in range(m) if r not in drop]
        T = np.vstack([T[keep], T[-1:]])
        T = np.hstack([T[:, :nv], T[:, -1:]])
        tab.T = T
        tab.basis = [tab.basis[r] for r in keep]
        A_std, b_std = A_std[keep], b_std[keep]
        m = len(keep)
    # phase 2 objective row: c - c_B B^-1 A
    T[-1, :] = 0.0
    T[-1, :nv] = c_std
    for r, j in enumerate(tab.basis):
        if c_std[j] != 0.0:
            T[-1] -= c_std[j] * T[r]
    if not tab.run(range(nv)):
        return LpResult(UNBOUNDED, iterations=tab.iterations)
    x_std = np.zeros(nv)
    for r, j in enumerate(tab.basis):
        x_std[j] = T[r, -1]
    B = A_std[:, tab.basis]
    y = np.linalg.lstsq(B.T, c_std[tab.basis], rcond=None)[0] if m else np.zeros(0)
    x = lo + x_std[:n]
    return LpResult(OPTIMAL, x, float(c @ x), tab.iterations, A_std, b_std, c_std, x_std, y)
