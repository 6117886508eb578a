"""Reference backend: read an LP/MPS file, solve it with HiGHS through
``scipy.optimize.milp`` and write a solution file.

Usage::

    python -m nestmip.backends.highs MODEL SOL [--time S] [--gap G]

SOS-1 sets over binaries are added as ``sum <= 1`` rows, since HiGHS has no
SOS support.  User cuts are kept as ordinary rows.  scipy does not report
simplex iterations, so that header is omitted.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import lil_matrix

from ..mip_ir import parse_model


def solve_file(model_path, time_s=3600.0, gap=1e-4):
    fmt = "mps" if model_path.lower().endswith(".mps") else "lp"
    with open(model_path) as fh:
        model = parse_model(fh.read(), fmt)
    names = list(model.variables)
    idx = {v: n for n, v in enumerate(names)}
    n = len(names)
    c = np.array([model.objective.get(v, 0.0) for v in names])
    rows = list(model.constraints)
    extra = []
    for s in model.sos1_sets:
        if not all(model.variables[v].is_binary for v in s.members):
            raise SystemExit(f"SOS {s.name}: only binary members are supported")
        extra.append(s.members)
    A = lil_matrix((len(rows) + len(extra), n))
    lb = np.full(A.shape[0], -np.inf)
    ub = np.full(A.shape[0], np.inf)
    for r, con in enumerate(rows):
        for v, coef in con.terms.items():
            A[r, idx[v]] = coef
        if con.sense in ("<=", "="):
            ub[r] = con.rhs
        if con.sense in (">=", "="):
            lb[r] = con.rhs
    for k, members in enumerate(extra):
        r = len(rows) + k
        for v in members:
            A[r, idx[v]] = 1.0
        ub[r] = 1.0
    integrality = np.array([1 if model.variables[v].is_binary else 0 for v in names])
    bounds = Bounds([model.variables[v].lo for v in names], [model.variables[v].hi for v in names])
    cons = [LinearConstraint(A.tocsr(), lb, ub)] if A.shape[0] else []
    res = milp(c, constraints=cons, integrality=integrality, bounds=bounds,
               options={"time_limit": float(time_s), "mip_rel_gap": float(gap), "disp": False})
    return names, res


def write_solution(path, names, res):
    if res.status == 0:
        status = "optimal"
    elif res.status == 2:
        status = "infeasible"
    elif res.status == 3:
        status = "unbounded"
    elif res.status == 1:
        status = "time_limit" if res.x is not None else "no_solution"
    else:
        status = "feasible" if res.x is not None else "error"
    with open(path, "w") as fh:
        fh.write(f"status={status}\n")
        if res.x is not None:
            fh.write(f"objective={res.fun!r}\n")
        bound = getattr(res, "mip_dual_bound", None)
        if bound is not None and math.isfinite(bound):
            fh.write(f"bound={bound!r}\n")
        nodes = getattr(res, "mip_node_count", None)
        if nodes is not None:
            fh.write(f"nodes={int(nodes)}\n")
        if res.x is not None:
            for v, val in zip(names, res.x):
                fh.write(f"{v} {float(val)!r}\n")


def main(argv=None):
    ap = argparse.ArgumentParser(prog="python -m nestmip.backends.highs", description=__doc__.split("\n")[0])
    ap.add_argument("model")
    ap.add_argument("sol")
    ap.add_argument("--time", type=float, default=3600.0)
    ap.add_argument("--gap", type=float, default=1e-4)
    args = ap.parse_args(argv)
    names, res = solve_file(args.model, args.time, args.gap)
    write_solution(args.sol, names, res)
    return 0


if __name__ == "__main__":
    sys.exit(main())
