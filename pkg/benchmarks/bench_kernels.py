"""Time the compiled and pure-Python kernels on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--size 60]
"""
import argparse
import timeit

import numpy as np

from nestmip import kernels


def triple_inputs(n, rng):
    def spans(m):
        lo = rng.uniform(-10, 10, m)
        return lo, lo + rng.uniform(0, 3, m)

    return (*spans(n), *spans(n), *spans(n))


def hull_inputs(n_points, rng):
    t = np.sort(rng.uniform(0, 2 * np.pi, 12))
    verts = np.column_stack([np.cos(t), np.sin(t)])
    pts = rng.uniform(-1.2, 1.2, (n_points, 2))
    return pts, verts


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=60, help="regions per side of the triple test")
    ap.add_argument("--points", type=int, default=200_000)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    tri = triple_inputs(args.size, rng)
    pts, verts = hull_inputs(args.points, rng)
    impls = kernels.implementations()
    print(f"active backend: {kernels.BACKEND}")

    ref_tri = ref_pic = None
    rows = []
    for name, impl in impls.items():
        r1 = kernels.triple_unfeasible(*tri, impl=impl)
        r2 = kernels.points_in_convex(pts, verts, impl=impl)
        if ref_tri is None:
            ref_tri, ref_pic = r1, r2
        same = bool(np.array_equal(r1, ref_tri) and np.array_equal(r2, ref_pic))
        t1 = min(timeit.repeat(lambda: kernels.triple_unfeasible(*tri, impl=impl), number=1, repeat=args.repeat))
        t2 = min(timeit.repeat(lambda: kernels.points_in_convex(pts, verts, impl=impl), number=1,
                               repeat=args.repeat))
        rows.append((name, t1, t2, same))

    base = {r[0]: r for r in rows}.get("python")
    print(f"{'impl':8s} {'triple [s]':>12s} {'points [s]':>12s} {'speedup':>16s} agree")
    for name, t1, t2, same in rows:
        sp = f"{base[1] / t1:6.1f}x {base[2] / t2:6.1f}x" if base else "-"
        print(f"{name:8s} {t1:12.5f} {t2:12.5f} {sp:>16s} {same}")
    if "cython" not in impls:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
