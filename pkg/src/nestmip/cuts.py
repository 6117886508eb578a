"""Reductions, valid inequalities and triple-piece cuts over a region registry."""
from __future__ import annotations

import enum
import logging
import random
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import EPS_GEOM, Interval, closed_disjoint, convex_contains
from .mip_ir import USER, USER_CUT_PREFIX
from .nfp_slices import RegionKind

log = logging.getLogger(__name__)


class RegionRelation(enum.Enum):
    IDENTICAL = "identical"
    SUBSUMES = "subsumes"  # first region contains the second
    SUBSUMED = "subsumed"
    DISJOINT = "disjoint"
    OVERLAPPING = "overlapping"


def region_relation(r1, r2, eps=EPS_GEOM) -> RegionRelation:
    """Relation between two closed clip polygons.

    Disjoint means closed-set separation: regions that only touch can both
    hold the same boundary placement, so they do not exclude each other.
    """
    p, q = r1.clip_polygon, r2.clip_polygon
    if closed_disjoint(p, q, eps):
        return RegionRelation.DISJOINT
    a_in_b = convex_contains(q, p, eps)
    b_in_a = convex_contains(p, q, eps)
    if a_in_b and b_in_a:
        return RegionRelation.IDENTICAL
    if b_in_a:
        return RegionRelation.SUBSUMES
    if a_in_b:
        return RegionRelation.SUBSUMED
    return RegionRelation.OVERLAPPING


# ---------------------------------------------------------------------------
# identical pieces


def _next_same_type(instance, i):
    t = instance.pieces[i - 1].type_id
    for j in range(i + 1, instance.N + 1):
        if instance.pieces[j - 1].type_id == t:
            return j
    return None


def add_symmetry_ordering(registry, model, axis="y") -> int:
    """``axis_i <= axis_j`` for each piece and its next piece of the same type."""
    inst = registry.instance
    n = 0
    for i in range(1, inst.N + 1):
        j = _next_same_type(inst, i)
        if j is None:
            continue
        model.add_constr(f"sym{axis}_{i}_{j}", {f"{axis}_{i}": 1.0, f"{axis}_{j}": -1.0}, "<=", 0.0,
                         family="sym")
        n += 1
    return n


def _y_range(edge):
    ys = (edge.a[1], edge.b[1])
    return min(ys), max(ys)


def identical_triple_groups(tops, bottoms, eps=EPS_GEOM):
    """Complete bipartite blocks of (top, bottom) pairs that cannot coexist.

    Above top edge ``k`` the relative y is at least the lower end of the edge;
    below bottom edge ``k'`` it is at most the upper end.  With ``y_j <= y_u``
    the pair is contradictory only when the first bound exceeds the second.
    Each block comes from a threshold ``tau``: tops entirely above ``tau``
    against bottoms entirely at or below it.
    """
    lows = [_y_range(e.edge)[0] for e in tops]
    highs = [_y_range(e.edge)[1] for e in bottoms]
    blocks = []
    seen = set()
    for tau in sorted(set(highs)):
        T = tuple(n for n, lo in enumerate(lows) if lo > tau + eps)
        B = tuple(n for n, hi in enumerate(highs) if hi <= tau)
        if T and B and (T, B) not in seen:
            seen.add((T, B))
            blocks.append((T, B))
    # drop blocks contained in another one
    keep = []
    for T, B in blocks:
        if not any(set(T) <= set(T2) and set(B) <= set(B2) and (T, B) != (T2, B2) for T2, B2 in blocks):
            keep.append((T, B))
    pairs = {(t, b) for T, B in keep for t in T for b in B}
    return keep, pairs


def apply_identical_piece_reductions(registry, model, eliminate=True, triples=True) -> dict:
    """y ordering, bottom-slice eliminations and the identical-piece rows."""
    inst = registry.instance
    report = {"ordering": add_symmetry_ordering(registry, model, "y"), "fixed": [],
              "identical_rows": 0, "identical_pairs": 0}
    if eliminate:
        for (i, j), parts in registry.parts.items():
            if inst.pieces[i - 1].type_id != inst.pieces[j - 1].type_id:
                continue
            for part in parts:
                for e in registry.entries[part.key]:
                    if e.var is None or e.kind is not RegionKind.BOTTOM:
                        continue
                    if e.edge.a[1] < -EPS_GEOM and e.edge.b[1] < -EPS_GEOM:
                        model.fix_to_zero(e.var)
                        report["fixed"].append(e.var)
                        e.var = None
    if triples:
        N = inst.N
        tid = [p.type_id for p in inst.pieces]
        for i in range(1, N + 1):
            for j in range(i + 1, N + 1):
                for u in range(j + 1, N + 1):
                    if tid[j - 1] != tid[u - 1]:
                        continue
                    for pij in registry.parts[(i, j)]:
                        for piu in registry.parts[(i, u)]:
                            if pij.f != piu.f:
                                continue
                            f, g, h = pij.f, pij.g, piu.g
                            tops = [e for e in registry.active(pij.key) if e.kind is RegionKind.TOP]
                            bots = [e for e in registry.active(piu.key) if e.kind is RegionKind.BOTTOM]
                            blocks, pairs = identical_triple_groups(tops, bots)
                            report["identical_pairs"] += len(pairs)
                            for n, (T, B) in enumerate(blocks):
                                terms = {tops[t].var: 1.0 for t in T}
                                terms.update({bots[b].var: 1.0 for b in B})
                                model.add_constr(f"ident_{i}_{j}_{u}_{f}_{g}_{h}_{n}", terms, "<=", 1.0,
                                                 family="ident")
                                report["identical_rows"] += 1
    return report


# ---------------------------------------------------------------------------
# merges and pairwise relations


def merge_duplicate_side_vars(registry, model) -> dict:
    """Share one left (right) binary among NfpParts of a pair with equal x_min (x_max)."""
    report = {"left": 0, "right": 0}
    for (i, j), parts in registry.parts.items():
        for kind, attr, label in ((RegionKind.LEFT, "x_min", "left"), (RegionKind.RIGHT, "x_max", "right")):
            reps = []  # (value, rep entry)
            for part in parts:
                for e in registry.entries[part.key]:
                    if e.kind is not kind or e.var is None:
                        continue
                    val = getattr(part, attr)
                    rep = next((r for x, r in reps if abs(x - val) <= EPS_GEOM), None)
                    if rep is None:
                        reps.append((val, e))
                        continue
                    old = e.var
                    # the slab row of ``old`` now duplicates the representative's
                    model.constraints = [c for c in model.constraints
                                         if not (c.owner == old and c.family == "slab")]
                    model.substitute(old, rep.var)
                    for c in model.constraints:
                        if c.owner == old:
                            c.owner = rep.var
                    e.var = rep.var
                    report[label] += 1
    return report


def greedy_edge_clique_cover(nodes, edges) -> list:
    """Deterministic cover of ``edges`` by cliques.

    Repeatedly take the lexicographically smallest uncovered edge and grow a
    clique from it, preferring candidates in node order.
    """
    order = {v: n for n, v in enumerate(nodes)}
    adj = {v: set() for v in nodes}
    norm = set()
    for a, b in edges:
        if order[a] > order[b]:
            a, b = b, a
        adj[a].add(b)
        adj[b].add(a)
        norm.add((a, b))
    uncovered = sorted(norm, key=lambda e: (order[e[0]], order[e[1]]))
    covered = set()
    cliques = []
    for a, b in uncovered:
        if (a, b) in covered:
            continue
        clique = [a, b]
        cand = sorted(adj[a] & adj[b], key=order.get)
        # first pass: candidates that cover something new; second: any
        for want_new in (True, False):
            for c in cand:
                if c in clique or not all(c in adj[m] for m in clique):
                    continue
                if want_new and all(tuple(sorted((c, m), key=order.get)) in covered for m in clique):
                    continue
                clique.append(c)
        clique.sort(key=order.get)
        for x in range(len(clique)):
            for y in range(x + 1, len(clique)):
                covered.add((clique[x], clique[y]))
        cliques.append(clique)
    return cliques


def pairwise_region_relation_cuts(registry, model, subsumption=True, cliques=True) -> dict:
    """Subsumption rows and clique SOS-1 sets between different NfpParts of a pair."""
    report = {"subsumption_rows": 0, "cliques": 0, "conflicts": 0, "relations": {}}
    var_order = {v: n for n, v in enumerate(model.variables)}
    for (i, j), parts in registry.parts.items():
        if len(parts) < 2:
            continue
        conflicts = []
        subsumed = {}  # (subsumed part key, subsumer var) -> [vars]
        for p1 in range(len(parts)):
            for p2 in range(p1 + 1, len(parts)):
                for e1 in registry.active(parts[p1].key):
                    for e2 in registry.active(parts[p2].key):
                        if e1.var == e2.var:
                            continue
                        rel = region_relation(e1.region, e2.region)
                        report["relations"][rel.value] = report["relations"].get(rel.value, 0) + 1
                        if rel is RegionRelation.DISJOINT:
                            conflicts.append((e1.var, e2.var))
                        elif rel is RegionRelation.SUBSUMED:
                            subsumed.setdefault((parts[p1].key, e2.var), []).append(e1.var)
                        elif rel is RegionRelation.SUBSUMES:
                            subsumed.setdefault((parts[p2].key, e1.var), []).append(e2.var)
        if subsumption:
            for n, ((pkey, sup), subs) in enumerate(subsumed.items()):
                terms = {v: 1.0 for v in subs}
                terms[sup] = terms.get(sup, 0.0) - 1.0
                model.add_constr(f"sub_{i}_{j}_{n}", terms, "<=", 0.0, family="subsume")
                report["subsumption_rows"] += 1
        if cliques and conflicts:
            conflicts = sorted(set(conflicts))
            nodes = sorted({v for e in conflicts for v in e}, key=var_order.get)
            report["conflicts"] += len(conflicts)
            for n, clique in enumerate(greedy_edge_clique_cover(nodes, conflicts)):
                model.add_sos1(f"clq_{i}_{j}_{n}", clique)
                report["cliques"] += 1
    return report


# ---------------------------------------------------------------------------
# triple cuts


@dataclass(frozen=True)
class TripleCut:
    i: int
    j: int
    u: int
    f: int
    g: int
    h: int
    k_ij: str  # region key in NFP(i, j, f, g)
    k_iu: str  # region key in NFP(i, u, f, h)
    k_ju: tuple  # excluded region keys in NFP(j, u, g, h)
    v_ij: str
    v_iu: str
    v_ju: tuple
    rhs: float = 2.0

    def terms(self) -> dict:
        out = {self.v_ij: 1.0, self.v_iu: 1.0}
        for v in self.v_ju:
            out[v] = out.get(v, 0.0) + 1.0
        return out

    def __str__(self):
        return " + ".join(sorted(self.terms())) + f" <= {self.rhs:g}"


def is_unfeasible_triple(R_ij, R_iu, R_ju, eps=EPS_GEOM) -> bool:
    """True when no x-placement of ``j`` fits all three regions at once."""
    x_ij = _span(R_ij)
    x_iu = _span(R_iu)
    x_ju = _span(R_ju)
    z = (x_ij + x_ju).intersect(Interval(x_iu.lo - eps, x_iu.hi + eps))
    return z.is_empty


def _span(r):
    return r if isinstance(r, Interval) else r.x_span


def _iter_triple_cuts(registry, eps):
    N = registry.instance.N
    seen = set()
    for i in range(1, N + 1):
        for j in range(i + 1, N + 1):
            for u in range(j + 1, N + 1):
                for pij in registry.parts[(i, j)]:
                    for piu in registry.parts[(i, u)]:
                        if piu.f != pij.f:
                            continue
                        for pju in registry.parts[(j, u)]:
                            if pju.f != pij.g or pju.g != piu.g:
                                continue
                            A = registry.active(pij.key)
                            B = registry.active(piu.key)
                            C = registry.active(pju.key)
                            if not (A and B and C):
                                continue
                            mask = kernels.triple_unfeasible(
                                [e.region.x_span.lo for e in A], [e.region.x_span.hi for e in A],
                                [e.region.x_span.lo for e in B], [e.region.x_span.hi for e in B],
                                [e.region.x_span.lo for e in C], [e.region.x_span.hi for e in C],
                                eps,
                            )
                            for a, b in zip(*np.nonzero(mask.any(axis=2))):
                                cs = np.nonzero(mask[a, b])[0]
                                vju = tuple(C[c].var for c in cs)
                                key = (A[a].var, B[b].var, frozenset(vju))
                                if key in seen:
                                    continue
                                seen.add(key)
                                yield TripleCut(
                                    i, j, u, pij.f, pij.g, piu.g,
                                    A[a].region.key, B[b].region.key,
                                    tuple(C[c].region.key for c in cs),
                                    A[a].var, B[b].var, vju,
                                )


def generate_triple_cuts(registry, cap=None, eps=EPS_GEOM) -> list:
    """Cuts in lexicographic (i, j, u, f, g, h, k, k') order, at most ``cap``."""
    cuts = []
    for cut in _iter_triple_cuts(registry, eps):
        if cap is not None and len(cuts) >= cap:
            warnings.warn(f"triple cuts truncated at the cap of {cap}", stacklevel=2)
            break
        cuts.append(cut)
    return cuts


def add_triple_cuts(model, cuts) -> int:
    for n, cut in enumerate(cuts, start=1):
        model.add_constr(f"{USER_CUT_PREFIX}{n}", cut.terms(), "<=", cut.rhs,
                         attachment=USER, family="triple")
    return len(cuts)


def validate_triple_cut(cut: TripleCut, registry, samples=100, seed=0, eps=EPS_GEOM) -> bool:
    """Sampling re-check: for sampled ``x_j - x_i`` in the first span, the
    shifted spans of every excluded ``(j, u)`` region miss the ``(i, u)`` span."""
    def region(key, rkey):
        return next(e.region for e in registry.entries[key] if e.region.key == rkey)

    r_ij = region((cut.i, cut.j, cut.f, cut.g), cut.k_ij)
    r_iu = region((cut.i, cut.u, cut.f, cut.h), cut.k_iu)
    rng = random.Random(seed)
    lo, hi = r_ij.x_span.lo, r_ij.x_span.hi
    xs = [lo, hi] + [rng.uniform(lo, hi) for _ in range(max(0, samples - 2))]
    for k in cut.k_ju:
        r_ju = region((cut.j, cut.u, cut.g, cut.h), k)
        for s in xs:
            shifted = Interval(s + r_ju.x_span.lo, s + r_ju.x_span.hi)
            if not shifted.intersect(Interval(r_iu.x_span.lo - eps, r_iu.x_span.hi + eps)).is_empty:
                return False
    return True


def write_cut_dump(cuts, path) -> None:
    """One cut per line: the variable names joined by ``+`` and the rhs."""
    with open(path, "w") as fh:
        for cut in cuts:
            fh.write(str(cut) + "\n")
