"""Command-line interface: ``nestmip {solve,bench,profile,verify,export}``.

Every option with a NESTMIP_* environment counterpart falls back to the
variable when the flag is absent; explicit flags win.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .bench import BenchConfig, performance_profile, run_benchmark, tables_from_results, write_profile_csv
from .builders import ALL_VARIANTS, BuildOptions, ModelVariant, build_model
from .cuts import write_cut_dump
from .errors import NestError
from .instance import find_instances, load_instance
from .mip_ir import export_model, model_stats
from .solve import (
    DEFAULT_TIME_LIMIT,
    Limits,
    Placement,
    enumerate_model,
    parse_solution,
    solve_external,
    verify_placement,
)
from .svg import write_svg

ENV = {
    "variant": "NESTMIP_VARIANT",
    "time_limit": "NESTMIP_TIME_LIMIT",
    "solver_cmd": "NESTMIP_SOLVER_CMD",
    "out": "NESTMIP_OUT",
    "cut_cap": "NESTMIP_CUT_CAP",
    "format": "NESTMIP_FORMAT",
}


def _env(key, default=None, kind=str):
    raw = os.environ.get(ENV[key])
    if raw is None or raw == "":
        return default
    try:
        return kind(raw)
    except ValueError:
        raise SystemExit(f"{ENV[key]}={raw!r} is not a valid value") from None


def _variants(values):
    if not values:
        return list(ALL_VARIANTS)
    out = []
    for v in values:
        for part in v.split(","):
            if part.strip().lower() == "all":
                out.extend(ALL_VARIANTS)
            elif part.strip():
                out.append(ModelVariant.parse(part.strip()))
    return list(dict.fromkeys(out))


def _common(p, multi_variant=False):
    if multi_variant:
        p.add_argument("--variant", action="append", default=None,
                       help="model variant(s), comma separated or repeated; 'all' (default)")
    else:
        p.add_argument("--variant", default=None, help="model variant (default NFP-CM-VS2)")
    p.add_argument("--time-limit", type=float, default=None, help="seconds per solve (default 3600)")
    p.add_argument("--solver-cmd", default=None,
                   help="backend command template with {model} {sol} {time} {gap} placeholders")
    p.add_argument("--format", choices=("lp", "mps"), default=None, help="model file format (default lp)")
    p.add_argument("--cut-cap", type=int, default=None, help="maximum number of triple cuts")
    p.add_argument("--no-cuts", action="store_true", help="disable every optional reduction and cut")


def _resolve(args):
    if isinstance(args.variant, list) or args.variant is None and hasattr(args, "instances"):
        env = _env("variant")
        args.variant = _variants(args.variant or ([env] if env else None))
    else:
        args.variant = ModelVariant.parse(args.variant or _env("variant", "NFP-CM-VS2"))
    args.time_limit = args.time_limit if args.time_limit is not None else _env("time_limit", DEFAULT_TIME_LIMIT, float)
    args.solver_cmd = args.solver_cmd or _env("solver_cmd")
    args.format = args.format or _env("format", "lp")
    args.cut_cap = args.cut_cap if args.cut_cap is not None else _env("cut_cap", None, int)
    if hasattr(args, "out"):
        args.out = args.out or _env("out")
    opts = BuildOptions.bare() if args.no_cuts else BuildOptions()
    args.options = BuildOptions(**{**opts.__dict__, "cut_cap": args.cut_cap})
    return args


def cmd_solve(args):
    inst = load_instance(args.instance)
    model, reg = build_model(inst, args.variant, args.options)
    if args.cut_dump:
        write_cut_dump(reg.reports.get("triple_cuts", []), args.cut_dump)
    limits = Limits(time_s=args.time_limit, gap_tol=args.gap)
    if args.enumerate:
        res = enumerate_model(model, time_s=args.time_limit)
    else:
        res = solve_external(model, args.solver_cmd, limits, args.format)
    st = model_stats(model)
    print(f"instance   {inst.name} (N={inst.N}, H={inst.H:g})")
    print(f"variant    {args.variant.value}  binaries={st.n_binary} rows={st.n_constraints_root} "
          f"user_cuts={st.n_user_cuts} sos1={st.n_sos1}")
    print(f"status     {res.status.value}")
    print(f"bounds     LB={res.lower_bound:.9g} UB={res.upper_bound:.9g} gap={res.gap:.6g}")
    print(f"effort     nodes={res.nodes}{'*' if res.counts_missing else ''} "
          f"iterations={res.simplex_iterations}{'*' if res.counts_missing else ''} time={res.wall_time_s:.3f}s")
    if res.placement is not None:
        for i, (x, y) in enumerate(res.placement.positions, start=1):
            print(f"x_{i} {x!r}\ny_{i} {y!r}")
        rep = verify_placement(inst, res.placement, args.tol)
        print(f"verify     {rep}")
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            write_svg(os.path.join(args.out, f"{inst.name}.svg"), inst, res.placement)
        return 0 if rep.ok else 1
    return 0


def cmd_bench(args):
    paths = find_instances(args.instances)
    if not paths:
        raise SystemExit("no instance files found")
    cfg = BenchConfig(
        instances=paths, variants=tuple(args.variant), limits=Limits(time_s=args.time_limit, gap_tol=args.gap),
        out_dir=args.out or "results", solver_cmd=args.solver_cmd, model_format=args.format,
        options=args.options, enumerate=args.enumerate, parallel=args.parallel,
    )
    results = run_benchmark(cfg)
    for variant, records in results.items():
        for r in records:
            row = r.row
            ub = "X" if row.upper_bound is None else f"{row.upper_bound:.6g}"
            gap = "X" if row.gap is None else f"{row.gap:.4g}"
            print(f"{variant:16s} {row.instance:28s} {r.status:12s} UB={ub:>10s} gap={gap:>8s} t={row.time_s:.2f}s")
    return 0


def cmd_profile(args):
    paths = [p for p in args.csv if not p.endswith(".status.csv")]  # sidecars are read alongside
    tables = tables_from_results(paths, args.gap)
    pts = performance_profile(tables, args.r_m)
    out = args.out or "profile.csv"
    write_profile_csv(pts, out)
    print(f"wrote {len(pts)} points for {len(tables)} models to {out}")
    return 0


def cmd_verify(args):
    inst = load_instance(args.instance)
    with open(args.solution) as fh:
        _, values = parse_solution(fh.read())
    try:
        pl = Placement.from_values(values)
    except KeyError as exc:
        raise SystemExit(f"solution lacks {exc}") from None
    rep = verify_placement(inst, pl, args.tol)
    print(rep)
    return 0 if rep.ok else 1


def cmd_export(args):
    inst = load_instance(args.instance)
    model, reg = build_model(inst, args.variant, args.options)
    if args.cut_dump:
        write_cut_dump(reg.reports.get("triple_cuts", []), args.cut_dump)
    text = export_model(model, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def make_parser():
    ap = argparse.ArgumentParser(prog="nestmip", description="MIP models for irregular strip packing")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="build and solve one instance")
    p.add_argument("instance")
    _common(p)
    p.add_argument("--gap", type=float, default=1e-4, help="relative gap tolerance")
    p.add_argument("--tol", type=float, default=1e-6, help="verification tolerance")
    p.add_argument("--out", default=None, help="directory for the SVG drawing")
    p.add_argument("--cut-dump", default=None, help="write the triple cuts to this file")
    p.add_argument("--enumerate", action="store_true", help="use the built-in exact enumerator")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run variants over instance files or directories")
    p.add_argument("instances", nargs="+")
    _common(p, multi_variant=True)
    p.add_argument("--gap", type=float, default=1e-4)
    p.add_argument("--out", default=None, help="output directory (default results)")
    p.add_argument("--enumerate", action="store_true", help="use the built-in exact enumerator")
    p.add_argument("--parallel", type=int, default=0, metavar="N",
                   help="run N instances at once (times become non-comparable)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("profile", help="performance profile from bench CSV files")
    p.add_argument("csv", nargs="+", help="one <variant>.csv per model")
    p.add_argument("--r-m", type=float, default=None, help="ratio for unsolved instances")
    p.add_argument("--gap", type=float, default=1e-4, help="solved threshold without status files")
    p.add_argument("--out", default=None, help="profile CSV path (default profile.csv)")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("verify", help="check a solution file against an instance")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="write the model as LP or MPS")
    p.add_argument("instance")
    _common(p)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--cut-dump", default=None)
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    if args.command in ("solve", "bench", "export"):
        try:
            _resolve(args)
        except ValueError as exc:
            parser.error(str(exc))
    if args.command == "profile":
        args.out = args.out or _env("out")
    try:
        return args.func(args)
    except NestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        out = getattr(exc, "output", "")
        if out:
            print(out[-2000:], file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
