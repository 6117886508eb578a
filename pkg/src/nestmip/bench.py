"""Batch runs, the 10-column raw CSV, SVG output and performance profiles."""
from __future__ import annotations

import csv
import logging
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

from .builders import ALL_VARIANTS, BuildOptions, ModelVariant, build_model
from .errors import CapExceeded, InputError, NestError
from .instance import load_instance
from .mip_ir import model_stats
from .solve import Limits, SolveStatus, enumerate_model, relative_gap, solve_external, verify_placement
from .svg import write_svg

log = logging.getLogger(__name__)

MISSING = "X"
CSV_COLUMNS = ("instance", "n_pieces", "efficiency", "lower_bound", "upper_bound", "gap",
               "n_binary", "nodes", "simplex_iterations", "time_s")
STATUS_COLUMNS = ("instance", "status", "counts_missing", "verified", "message")


@dataclass
class BenchRow:
    instance: str
    n_pieces: int
    efficiency: float | None
    lower_bound: float | None
    upper_bound: float | None
    gap: float | None
    n_binary: int
    nodes: int
    simplex_iterations: int
    time_s: float

    def as_csv(self) -> list:
        return [_cell(getattr(self, c)) for c in CSV_COLUMNS]


@dataclass
class RunRecord:
    """A CSV row plus what does not fit the 10-column schema."""

    row: BenchRow
    status: str
    counts_missing: bool = False
    verified: bool | None = None
    message: str = ""


def _cell(v):
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return MISSING
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_cell(text, kind):
    if text == MISSING:
        return None
    return kind(text)


_KINDS = {"instance": str, "n_pieces": int, "n_binary": int, "nodes": int, "simplex_iterations": int}


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r.as_csv())


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        head = next(rd, None)
        if tuple(head or ()) != CSV_COLUMNS:
            raise InputError(f"{path}: header is not the 10-column raw-output schema")
        out = []
        for n, rec in enumerate(rd, start=2):
            if len(rec) != len(CSV_COLUMNS):
                raise InputError(f"{path}:{n}: expected {len(CSV_COLUMNS)} columns, got {len(rec)}")
            vals = [_parse_cell(t, _KINDS.get(c, float)) for c, t in zip(CSV_COLUMNS, rec)]
            out.append(BenchRow(*vals))
    return out


def write_status(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(STATUS_COLUMNS)
        for r in records:
            w.writerow([r.row.instance, r.status, int(r.counts_missing),
                        "" if r.verified is None else int(r.verified), r.message])


def read_status(path) -> dict:
    with open(path, newline="") as fh:
        return {rec["instance"]: rec for rec in csv.DictReader(fh)}


def efficiency(instance, upper_bound) -> float | None:
    if upper_bound is None or not math.isfinite(upper_bound) or upper_bound <= 0:
        return None
    return instance.total_area / (instance.H * upper_bound)


@dataclass
class BenchConfig:
    instances: list
    variants: tuple = ALL_VARIANTS
    limits: Limits = field(default_factory=Limits)
    out_dir: str = "results"
    solver_cmd: str | None = None
    model_format: str = "lp"
    options: BuildOptions = field(default_factory=BuildOptions)
    enumerate: bool = False  # use the built-in enumerator instead of a backend
    svg: bool = True
    parallel: int = 0  # worker threads; 0 runs instances one after another


def run_instance(instance, variant, config: BenchConfig) -> tuple:
    """Build and solve one instance; returns ``(RunRecord, SolveResult | None)``."""
    variant = ModelVariant.parse(variant)
    t0 = time.perf_counter()
    try:
        model, _ = build_model(instance, variant, config.options)
        stats = model_stats(model)
        if config.enumerate:
            res = enumerate_model(model, time_s=config.limits.time_s)
        else:
            res = solve_external(model, config.solver_cmd, config.limits, config.model_format)
    except (NestError, OSError) as exc:
        kind = "cap" if isinstance(exc, CapExceeded) else "error"
        row = BenchRow(instance.name, instance.N, None, None, None, None, 0, 0, 0,
                       time.perf_counter() - t0)
        return RunRecord(row, f"{kind}: {exc}", message=getattr(exc, "output", "")[-500:]), None
    ub = res.upper_bound if res.status.has_solution else None
    lb = res.lower_bound if math.isfinite(res.lower_bound) else None
    gap = relative_gap(res.lower_bound, res.upper_bound) if ub is not None else None
    t = res.wall_time_s
    if res.status in (SolveStatus.TimeLimit, SolveStatus.NoSolution) and t >= config.limits.time_s * 0.99:
        t = config.limits.time_s
    row = BenchRow(instance.name, instance.N, efficiency(instance, ub), lb, ub,
                   None if gap is None or math.isnan(gap) else gap,
                   stats.n_binary, res.nodes, res.simplex_iterations, t)
    verified = None
    if res.placement is not None:
        verified = verify_placement(instance, res.placement, 1e-6).ok
    return RunRecord(row, res.status.value, res.counts_missing, verified), res


def run_benchmark(config: BenchConfig) -> dict:
    """One CSV (plus status sidecar) per variant and one SVG per solved instance.

    Files: ``<out>/<variant>.csv``, ``<out>/<variant>.status.csv`` and
    ``<out>/<variant>/<instance>.svg``.  Returns ``{variant: [RunRecord]}``.
    """
    os.makedirs(config.out_dir, exist_ok=True)
    if config.parallel > 1:
        warnings.warn("parallel bench: instances share the machine, so reported times are not comparable",
                      stacklevel=2)
    loaded = []
    for path in config.instances:
        try:
            loaded.append((path, load_instance(path)))
        except NestError as exc:
            log.error("skipping %s: %s", path, exc)
            loaded.append((path, exc))
    results = {}
    for variant in config.variants:
        variant = ModelVariant.parse(variant)
        vdir = os.path.join(config.out_dir, variant.value)
        os.makedirs(vdir, exist_ok=True)
        def one(item):
            path, inst = item
            if isinstance(inst, Exception):
                name = os.path.splitext(os.path.basename(path))[0]
                return RunRecord(BenchRow(name, 0, None, None, None, None, 0, 0, 0, 0.0), f"error: {inst}")
            log.info("%s / %s", variant.value, inst.name)
            rec, res = run_instance(inst, variant, config)
            if config.svg and res is not None and res.placement is not None:
                write_svg(os.path.join(vdir, f"{inst.name}.svg"), inst, res.placement,
                          f"{inst.name} ({variant.value}) L={res.upper_bound:.6g}")
            return rec

        if config.parallel > 1:
            with ThreadPoolExecutor(config.parallel) as pool:
                records = list(pool.map(one, loaded))
        else:
            records = [one(item) for item in loaded]
        write_csv([r.row for r in records], os.path.join(config.out_dir, f"{variant.value}.csv"))
        write_status(records, os.path.join(config.out_dir, f"{variant.value}.status.csv"))
        results[variant.value] = records
    return results


# ---------------------------------------------------------------------------
# performance profiles


@dataclass(frozen=True)
class ProfilePoint:
    model: str
    tau: float
    rho: float


def time_ratios(tables: dict, r_M: float | None = None, min_time: float = 1e-9):
    """Per-model ratios to the fastest solving model.

    ``tables`` maps model -> {instance: (time_s, solved)}.  Unsolved entries
    get ``r_M`` (default: twice the largest finite ratio).
    """
    models = list(tables)
    if not models:
        raise InputError("no models given")
    names = set(tables[models[0]])
    for m in models[1:]:
        if set(tables[m]) != names:
            raise InputError(f"model {m!r} was evaluated on a different instance set")
    ratios = {m: {} for m in models}
    for phi in sorted(names):
        solved = [max(tables[m][phi][0], min_time) for m in models if tables[m][phi][1]]
        best = min(solved) if solved else None
        for m in models:
            t, ok = tables[m][phi]
            ratios[m][phi] = max(t, min_time) / best if ok else None
    finite = [r for rs in ratios.values() for r in rs.values() if r is not None]
    if r_M is None:
        r_M = 2.0 * max(finite) if finite else 2.0
    for m in models:
        for phi, r in ratios[m].items():
            if r is None:
                ratios[m][phi] = r_M
    return ratios, r_M


def performance_profile(tables: dict, r_M: float | None = None) -> list:
    """Step points of each model's cumulative distribution of time ratios.

    For every model the curve is evaluated at all distinct ratios of all
    models plus 1 and ``r_M``, so the series can be plotted as steps.
    """
    ratios, r_M = time_ratios(tables, r_M)
    taus = sorted({1.0, r_M} | {r for rs in ratios.values() for r in rs.values()})
    out = []
    for m, rs in ratios.items():
        n = len(rs)
        vals = sorted(rs.values())
        for tau in taus:
            cnt = sum(1 for r in vals if r <= tau)
            out.append(ProfilePoint(m, tau, cnt / n if n else 0.0))
    return out


def write_profile_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("model", "tau", "rho"))
        for p in points:
            w.writerow((p.model, repr(p.tau), repr(p.rho)))


def tables_from_results(csv_paths, gap_tol=1e-4) -> dict:
    """Profile input from bench CSVs; the model id is the file stem.

    An instance counts as solved when its status sidecar says Optimal and the
    placement verified, or, without a sidecar, when the gap is within ``gap_tol``.
    """
    tables = {}
    for path in csv_paths:
        model = os.path.basename(path)[:-4] if path.endswith(".csv") else os.path.basename(path)
        side = path[:-4] + ".status.csv"
        status = read_status(side) if os.path.exists(side) else None
        t = {}
        for row in read_csv(path):
            if status is not None and row.instance in status:
                rec = status[row.instance]
                ok = rec["status"] == SolveStatus.Optimal.value and rec.get("verified") != "0"
            else:
                ok = row.gap is not None and row.gap <= gap_tol
            t[row.instance] = (row.time_s, ok)
        tables[model] = t
    return tables


def bench_field_names():
    return [f.name for f in fields(BenchRow)]
