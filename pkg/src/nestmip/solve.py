"""Solving models: external solver processes, the exact enumerator for tiny
instances, and geometric verification of placements."""
from __future__ import annotations

import enum
import logging
import math
import os
import shlex
import subprocess
import sys
import tempfile
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .builders import build_model
from .errors import BackendError, CapExceeded, ParseError
from .geometry import penetration_depth
from .lp import OPTIMAL, solve_lp
from .mip_ir import MipModel, export_model

log = logging.getLogger(__name__)

DEFAULT_TIME_LIMIT = 3600.0
DEFAULT_GAP_TOL = 1e-4
DEFAULT_ENUM_CAP = 10**6
DEFAULT_SOLVER_CMD = f"{shlex.quote(sys.executable)} -m nestmip.backends.highs {{model}} {{sol}} --time {{time}} --gap {{gap}}"


class SolveStatus(enum.Enum):
    Optimal = "Optimal"
    Feasible = "Feasible"
    Infeasible = "Infeasible"
    TimeLimit = "TimeLimit"
    NoSolution = "NoSolution"

    @property
    def has_solution(self) -> bool:
        return self in (SolveStatus.Optimal, SolveStatus.Feasible, SolveStatus.TimeLimit)


@dataclass(frozen=True)
class Placement:
    positions: tuple  # ((x_1, y_1), ...) reference-point coordinates
    L: float

    @classmethod
    def from_values(cls, values: dict) -> "Placement":
        n = 0
        while f"x_{n + 1}" in values:
            n += 1
        return cls(tuple((values[f"x_{i}"], values[f"y_{i}"]) for i in range(1, n + 1)), values["L"])


@dataclass(frozen=True)
class Limits:
    time_s: float = DEFAULT_TIME_LIMIT
    gap_tol: float = DEFAULT_GAP_TOL
    threads: int = 1
    seed: int = 0


@dataclass
class SolveResult:
    status: SolveStatus
    lower_bound: float = -math.inf
    upper_bound: float = math.inf
    nodes: int = 0
    simplex_iterations: int = 0
    wall_time_s: float = 0.0
    placement: Placement | None = None
    counts_missing: bool = False
    values: dict = field(default_factory=dict, repr=False)
    message: str = ""

    @property
    def gap(self) -> float:
        return relative_gap(self.lower_bound, self.upper_bound)


def relative_gap(lb, ub) -> float:
    """``(UB - LB) / UB``; NaN when either bound is missing or UB is not positive."""
    if not (math.isfinite(lb) and math.isfinite(ub)) or ub <= 0:
        return math.nan
    return min(1.0, max(0.0, (ub - lb) / ub))


# ---------------------------------------------------------------------------
# solution files

_HEADER_KEYS = {
    "status": "status", "objective": "objective", "obj": "objective",
    "bound": "bound", "best_bound": "bound", "dual_bound": "bound",
    "nodes": "nodes", "iterations": "iterations", "simplex_iterations": "iterations",
    "time": "time",
}
_STATUS = {
    "optimal": SolveStatus.Optimal,
    "feasible": SolveStatus.Feasible,
    "infeasible": SolveStatus.Infeasible,
    "time_limit": SolveStatus.TimeLimit,
    "timelimit": SolveStatus.TimeLimit,
    "no_solution": SolveStatus.NoSolution,
    "nosolution": SolveStatus.NoSolution,
    "unbounded": SolveStatus.NoSolution,
    "error": SolveStatus.NoSolution,
}
BINARY_AMBIGUITY = 0.1  # |v - 0.5| below this is rejected


def parse_solution(text: str, model: MipModel | None = None):
    """Parse ``key=value`` headers and ``name value`` lines.

    Returns ``(header, values)``.  Binary variables of ``model`` are rounded;
    values within ``BINARY_AMBIGUITY`` of 0.5 raise :class:`ParseError`.
    """
    header, values = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line:
            key, _, val = (s.strip() for s in line.partition("="))
        else:
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"solution line {lineno}: expected 'name value', got {line!r}")
            key, val = parts
        hkey = _HEADER_KEYS.get(key.lower())
        if hkey is not None and (model is None or key not in model.variables):
            header[hkey] = val
            continue
        try:
            values[key] = float(val)
        except ValueError:
            raise ParseError(f"solution line {lineno}: value {val!r} is not a number") from None
    if model is not None:
        for name, var in model.variables.items():
            if not var.is_binary or name not in values:
                continue
            v = values[name]
            if abs(v - 0.5) < BINARY_AMBIGUITY:
                raise ParseError(f"binary {name} has ambiguous value {v}")
            values[name] = 1.0 if v > 0.5 else 0.0
    return header, values


def _result_from_solution(header, values, wall) -> SolveResult:
    st = header.get("status", "").strip().lower()
    if st not in _STATUS:
        raise ParseError(f"unknown or missing status {header.get('status')!r}")
    status = _STATUS[st]
    if status.has_solution and "L" not in values:
        status = SolveStatus.NoSolution
    res = SolveResult(status, wall_time_s=wall, values=values)
    if status.has_solution:
        res.upper_bound = float(header.get("objective", values["L"]))
        res.placement = Placement.from_values(values)
    if "bound" in header:
        res.lower_bound = float(header["bound"])
    elif status is SolveStatus.Optimal:
        res.lower_bound = res.upper_bound
    missing = False
    for key, attr in (("nodes", "nodes"), ("iterations", "simplex_iterations")):
        if key in header:
            setattr(res, attr, int(float(header[key])))
        else:
            missing = True
    res.counts_missing = missing
    return res


def solve_external(model: MipModel, backend_command: str | None = None, limits: Limits | None = None,
                   format: str = "lp", workdir=None, keep_files=False) -> SolveResult:
    """Write ``model``, run the backend command and read its solution file.

    Placeholders ``{model}``, ``{sol}``, ``{time}``, ``{gap}``, ``{threads}`` and
    ``{seed}`` in the command template are substituted.
    """
    limits = limits or Limits()
    cmd_t = backend_command or DEFAULT_SOLVER_CMD
    tmp = tempfile.mkdtemp(prefix="nestmip_", dir=workdir)
    mpath = os.path.join(tmp, f"model.{format}")
    spath = os.path.join(tmp, "model.sol")
    with open(mpath, "w") as fh:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fh.write(export_model(model, format))
    subst = {"model": shlex.quote(mpath), "sol": shlex.quote(spath), "time": f"{limits.time_s:g}",
             "gap": f"{limits.gap_tol:g}", "threads": str(limits.threads), "seed": str(limits.seed)}
    cmd = cmd_t
    for k, v in subst.items():
        cmd = cmd.replace("{" + k + "}", v)
    t0 = time.perf_counter()
    try:
        proc = subprocess.run(shlex.split(cmd), capture_output=True, text=True,
                              timeout=limits.time_s + 120.0)
    except FileNotFoundError as exc:
        raise BackendError(f"backend not found: {exc}") from None
    except subprocess.TimeoutExpired as exc:
        raise BackendError("backend did not stop after the time limit", str(exc.stdout or "")) from None
    wall = time.perf_counter() - t0
    output = (proc.stdout or "") + (proc.stderr or "")
    if proc.returncode != 0:
        raise BackendError(f"backend exited with code {proc.returncode}", output)
    if not os.path.exists(spath):
        raise BackendError("backend wrote no solution file", output)
    with open(spath) as fh:
        header, values = parse_solution(fh.read(), model)
    res = _result_from_solution(header, values, wall)
    if not keep_files:
        for p in (mpath, spath):
            os.remove(p)
        os.rmdir(tmp)
    return res


# ---------------------------------------------------------------------------
# exact enumeration


class _Enumerator:
    def __init__(self, model: MipModel, cap, time_s):
        self.model = model
        self.t_end = time.perf_counter() + time_s
        self.cont = [v for v, var in model.variables.items() if not var.is_binary]
        self.cidx = {v: n for n, v in enumerate(self.cont)}
        self.bins = [v for v, var in model.variables.items() if var.is_binary]
        self.lo = np.array([model.variables[v].lo for v in self.cont])
        self.hi = np.array([model.variables[v].hi for v in self.cont])
        self.c = np.array([model.objective.get(v, 0.0) for v in self.cont])
        for v in self.bins:
            if model.objective.get(v, 0.0):
                raise ValueError("binary objective terms are not supported by the enumerator")
        # selection groups: = 1 rows over unit-coefficient binaries
        self.groups = []
        grouped = set()
        for con in model.constraints:
            if (con.sense == "=" and con.rhs == 1.0 and con.terms
                    and all(v in model.variables and model.variables[v].is_binary and c == 1.0
                            for v, c in con.terms.items())):
                self.groups.append(list(con.terms))
                grouped.update(con.terms)
        for v in self.bins:
            if v not in grouped:
                self.groups.append([v, None])  # free binary: 1 or 0
        size = 1
        for g in self.groups:
            size *= len(g)
            if size > cap:
                raise CapExceeded(f"more than {cap} binary assignments")
        self.size = size
        # rows split into pure-binary and mixed
        self.bin_rows, self.mixed = [], []
        for con in model.constraints:
            bterms = {v: c for v, c in con.terms.items() if model.variables[v].is_binary}
            cterms = {v: c for v, c in con.terms.items() if not model.variables[v].is_binary}
            if cterms:
                row = np.zeros(len(self.cont))
                for v, c in cterms.items():
                    row[self.cidx[v]] = c
                self.mixed.append((row, bterms, con.sense, con.rhs))
            else:
                self.bin_rows.append((bterms, con.sense, con.rhs))
        self.sos = [s.members for s in model.sos1_sets]
        self.best = math.inf
        self.best_x = None
        self.best_assign = None
        self.nodes = 0
        self.iterations = 0
        self.timed_out = False

    def _binary_ok(self, assign):
        for terms, sense, rhs in self.bin_rows:
            lo = hi = 0.0
            for v, c in terms.items():
                val = assign.get(v)
                if val is None:
                    if c > 0:
                        hi += c
                    else:
                        lo += c
                else:
                    lo += c * val
                    hi += c * val
            if sense == "<=" and lo > rhs + 1e-9:
                return False
            if sense == ">=" and hi < rhs - 1e-9:
                return False
            if sense == "=" and (lo > rhs + 1e-9 or hi < rhs - 1e-9):
                return False
        for members in self.sos:
            if sum(1 for v in members if assign.get(v) == 1) > 1:
                return False
        return True

    def _lp(self, assign):
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for row, bterms, sense, rhs in self.mixed:
            if any(v not in assign for v in bterms):
                continue
            r = rhs - sum(c * assign[v] for v, c in bterms.items())
            if sense == "<=":
                ub_rows.append(row)
                ub_rhs.append(r)
            elif sense == ">=":
                ub_rows.append(-row)
                ub_rhs.append(-r)
            else:
                eq_rows.append(row)
                eq_rhs.append(r)
        res = solve_lp(self.c, np.array(ub_rows) if ub_rows else None, np.array(ub_rhs),
                       np.array(eq_rows) if eq_rows else None, np.array(eq_rhs), self.lo, self.hi)
        self.iterations += res.iterations
        return res

    def search(self, depth=0, assign=None):
        assign = {} if assign is None else assign
        if time.perf_counter() > self.t_end:
            self.timed_out = True
            return
        self.nodes += 1
        res = self._lp(assign)
        if res.status != OPTIMAL or res.objective >= self.best - 1e-9 * max(1.0, abs(self.best)):
            return
        if depth == len(self.groups):
            self.best, self.best_x, self.best_assign = res.objective, res.x, dict(assign)
            return
        group = self.groups[depth]
        ones = [v for v in group if v is not None and assign.get(v) == 1]
        if len(ones) > 1:
            return
        choices = ones if ones else [v for v in group if v is None or v not in assign]
        for choice in choices:
            added = []
            for v in group:
                if v is None or v in assign:
                    continue
                assign[v] = 1.0 if v == choice else 0.0
                added.append(v)
            if self._binary_ok(assign):
                self.search(depth + 1, assign)
            for v in added:
                del assign[v]
            if self.timed_out:
                return


def enumerate_model(model: MipModel, cap=DEFAULT_ENUM_CAP, time_s=DEFAULT_TIME_LIMIT) -> SolveResult:
    """Exact optimum of a model whose binaries come in selection groups.

    Depth-first over the groups; at each node the LP over the rows whose
    binaries are all fixed is a relaxation, so infeasible or dominated
    branches are cut early.  Pure-binary rows and SOS-1 sets are checked
    combinatorially.
    """
    t0 = time.perf_counter()
    en = _Enumerator(model, cap, time_s)
    en.search()
    wall = time.perf_counter() - t0
    if en.best_x is None:
        status = SolveStatus.NoSolution if en.timed_out else SolveStatus.Infeasible
        return SolveResult(status, nodes=en.nodes, simplex_iterations=en.iterations, wall_time_s=wall)
    values = dict(zip(en.cont, (float(v) for v in en.best_x)))
    values.update(en.best_assign)
    status = SolveStatus.TimeLimit if en.timed_out else SolveStatus.Optimal
    res = SolveResult(status, en.best if status is SolveStatus.Optimal else -math.inf, en.best,
                      en.nodes, en.iterations, wall, Placement.from_values(values), values=values)
    return res


def enumerate_exact(instance, variant, limits: Limits | None = None, cap=DEFAULT_ENUM_CAP,
                    options=None) -> SolveResult:
    limits = limits or Limits()
    model, _ = build_model(instance, variant, options)
    return enumerate_model(model, cap=cap, time_s=limits.time_s)


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class Violation:
    kind: str  # "containment", "overlap" or "length"
    detail: str
    amount: float


@dataclass
class VerificationReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "placement OK"
        return "\n".join(f"{v.kind}: {v.detail} ({v.amount:.6g})" for v in self.violations)


def placed_parts(instance, placement: Placement):
    """``[(piece index, part index, translated polygon)]``."""
    out = []
    for i, (x, y) in enumerate(placement.positions, start=1):
        for f, part in enumerate(instance.piece_type(i).convex_parts, start=1):
            out.append((i, f, part.polygon.translated(x, y)))
    return out


def verify_placement(instance, placement: Placement, tol: float = 1e-6) -> VerificationReport:
    """Containment, pairwise overlap deeper than the tolerance, and strip length."""
    if len(placement.positions) != instance.N:
        raise ValueError(f"placement has {len(placement.positions)} pieces, instance {instance.N}")
    L, H = placement.L, instance.H
    bad = []
    parts = placed_parts(instance, placement)
    for i, f, poly in parts:
        x0, y0, x1, y1 = poly.bbox()
        excess = max(-x0, -y0, x1 - L, y1 - H)
        if excess > tol:
            bad.append(Violation("containment", f"piece {i} part {f} leaves the board", excess))
    for a in range(len(parts)):
        ia, fa, pa = parts[a]
        for b in range(a + 1, len(parts)):
            ib, fb, pb = parts[b]
            if ia == ib:
                continue
            depth = penetration_depth(pa, pb)
            # shrinking each part by tol removes 2*tol of penetration
            if depth > 2 * tol:
                bad.append(Violation("overlap", f"piece {ia} part {fa} vs piece {ib} part {fb}", depth))
    length = max(x + instance.piece_type(i).l_max for i, (x, _) in enumerate(placement.positions, start=1))
    if length > L + tol:
        bad.append(Violation("length", f"pieces reach x = {length:.9g} beyond L", length - L))
    return VerificationReport(bad)
