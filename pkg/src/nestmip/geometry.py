"""Polygon primitives used by every other module.

All tests against zero use the absolute tolerance ``EPS_GEOM`` expressed in
instance length units.  Distances (not raw cross products) are compared to it,
so the tolerance keeps its meaning for long and short edges alike.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegenerateGeometry, InvalidGeometry

EPS_GEOM = 1e-9

Point = tuple  # (x, y) pair of floats


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _turn(a, b, c):
    """Signed distance of ``c`` from the directed line ``a -> b``.

    Positive on the left (counter-clockwise turn).
    """
    dx, dy = b[0] - a[0], b[1] - a[1]
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        return 0.0
    return _cross(dx, dy, c[0] - a[0], c[1] - a[1]) / norm


def _same_point(p, q, eps=EPS_GEOM):
    return abs(p[0] - q[0]) <= eps and abs(p[1] - q[1]) <= eps


def _raw_area(pts: Sequence[Point]) -> float:
    s = 0.0
    n = len(pts)
    for k in range(n):
        x0, y0 = pts[k]
        x1, y1 = pts[(k + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def signed_area(polygon) -> float:
    """Shoelace area; positive iff the vertices run counter-clockwise.

    Accepts a :class:`Polygon` or a raw vertex sequence so that clockwise input
    can be measured before normalisation.
    """
    pts = polygon.vertices if isinstance(polygon, Polygon) else list(polygon)
    if len(pts) < 3:
        raise DegenerateGeometry("polygon needs at least 3 vertices")
    area = _raw_area(pts)
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    span = max(max(xs) - min(xs), max(ys) - min(ys))
    if abs(area) <= EPS_GEOM * max(span, 1.0):
        raise DegenerateGeometry("polygon has (numerically) zero area")
    return area


def _segments_intersect(p1, p2, q1, q2, eps=EPS_GEOM):
    d1 = _turn(q1, q2, p1)
    d2 = _turn(q1, q2, p2)
    d3 = _turn(p1, p2, q1)
    d4 = _turn(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    ):
        return True

    def on_seg(a, b, c):
        return (
            min(a[0], b[0]) - eps <= c[0] <= max(a[0], b[0]) + eps
            and min(a[1], b[1]) - eps <= c[1] <= max(a[1], b[1]) + eps
        )

    if abs(d1) <= eps and on_seg(q1, q2, p1):
        return True
    if abs(d2) <= eps and on_seg(q1, q2, p2):
        return True
    if abs(d3) <= eps and on_seg(p1, p2, q1):
        return True
    if abs(d4) <= eps and on_seg(p1, p2, q2):
        return True
    return False


def is_simple(pts: Sequence[Point]) -> bool:
    n = len(pts)
    for a in range(n):
        a1 = (a + 1) % n
        for b in range(a + 1, n):
            b1 = (b + 1) % n
            if b == a1 or a == b1:
                continue
            if _segments_intersect(pts[a], pts[a1], pts[b], pts[b1]):
                return False
    return True


@dataclass(frozen=True)
class Polygon:
    """Simple counter-clockwise polygon without repeated or collinear vertices."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise InvalidGeometry(f"polygon needs at least 3 distinct vertices, got {n}")
        for x, y in verts:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise InvalidGeometry("non-finite vertex coordinate")
        for k in range(n):
            if _same_point(verts[k], verts[(k + 1) % n]):
                raise InvalidGeometry("repeated consecutive vertex")
        if signed_area(verts) <= 0:
            raise InvalidGeometry("polygon is not counter-clockwise")
        for k in range(n):
            if abs(_turn(verts[k - 1], verts[(k + 1) % n], verts[k])) <= EPS_GEOM:
                raise InvalidGeometry("collinear consecutive vertices")
        if n > 3 and not is_simple(verts):
            raise InvalidGeometry("polygon boundary self-intersects")

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    @property
    def area(self) -> float:
        return _raw_area(self.vertices)

    @property
    def edges(self):
        n = len(self.vertices)
        return [(self.vertices[k], self.vertices[(k + 1) % n]) for k in range(n)]

    def bbox(self):
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def is_convex(self, eps=EPS_GEOM) -> bool:
        v = self.vertices
        n = len(v)
        return all(_turn(v[k - 1], v[k], v[(k + 1) % n]) >= -eps for k in range(n))

    def translated(self, dx, dy) -> "Polygon":
        return Polygon(tuple((x + dx, y + dy) for x, y in self.vertices))


@dataclass(frozen=True)
class ConvexPart:
    polygon: Polygon
    part_index: int

    def __post_init__(self):
        if not self.polygon.is_convex():
            raise InvalidGeometry(f"convex part {self.part_index} is not convex")


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    @classmethod
    def empty(cls) -> "Interval":
        return EMPTY

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    def __add__(self, other: "Interval") -> "Interval":
        if self.is_empty or other.is_empty:
            return EMPTY
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def intersect(self, other: "Interval") -> "Interval":
        if self.is_empty or other.is_empty:
            return EMPTY
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else EMPTY

    def contains(self, x, eps=0.0) -> bool:
        return self.lo - eps <= x <= self.hi + eps


EMPTY = Interval(math.inf, -math.inf)


def normalize_vertices(points: Iterable[Point], eps=EPS_GEOM) -> list:
    """Drop repeated and collinear vertices and orient counter-clockwise."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) >= 2 and _same_point(pts[0], pts[-1], eps):
        pts.pop()
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        out = []
        for p in pts:
            if not out or not _same_point(out[-1], p, eps):
                out.append(p)
        if len(out) > 1 and _same_point(out[0], out[-1], eps):
            out.pop()
        pts = out
        n = len(pts)
        for k in range(n):
            a, b, c = pts[k - 1], pts[k], pts[(k + 1) % n]
            if _same_point(a, c, eps) or abs(_turn(a, c, b)) <= eps:
                del pts[k]  # collinear vertex or a zero-width spike
                changed = True
                break
    if len(pts) < 3:
        raise InvalidGeometry("fewer than 3 distinct, non-collinear vertices")
    if _raw_area(pts) < 0:
        pts.reverse()
    return pts


def make_polygon(points: Iterable[Point]) -> Polygon:
    return Polygon(tuple(normalize_vertices(points)))


# ---------------------------------------------------------------------------
# convex decomposition


def _point_in_triangle(p, a, b, c, eps=EPS_GEOM):
    return _turn(a, b, p) >= -eps and _turn(b, c, p) >= -eps and _turn(c, a, p) >= -eps


def triangulate(polygon: Polygon) -> list:
    """Ear-clipping triangulation; returns index triples into ``polygon.vertices``."""
    v = polygon.vertices
    idx = list(range(len(v)))
    tris = []
    while len(idx) > 3:
        n = len(idx)
        for k in range(n):
            ia, ib, ic = idx[k - 1], idx[k], idx[(k + 1) % n]
            a, b, c = v[ia], v[ib], v[ic]
            if _turn(a, b, c) <= EPS_GEOM:
                continue  # reflex or flat corner
            blocked = False
            for m in idx:
                if m in (ia, ib, ic):
                    continue
                p = v[m]
                if _same_point(p, a) or _same_point(p, b) or _same_point(p, c):
                    continue
                if _point_in_triangle(p, a, b, c):
                    blocked = True
                    break
            if blocked:
                continue
            tris.append((ia, ib, ic))
            del idx[k]
            break
        else:
            raise InvalidGeometry("triangulation failed: no ear found")
    tris.append(tuple(idx))
    return tris


def _is_convex_idx(cycle, v, eps=EPS_GEOM):
    n = len(cycle)
    return all(
        _turn(v[cycle[k - 1]], v[cycle[k]], v[cycle[(k + 1) % n]]) >= -eps for k in range(n)
    )


def _merge_cycles(a, b, u, w):
    """Glue cycle ``a`` (holding edge u->w) and ``b`` (holding w->u)."""
    ka = a.index(w)
    a_rot = a[ka:] + a[:ka]  # starts at w, ends at u
    kb = b.index(u)
    b_rot = b[kb:] + b[:kb]  # starts at u, ends at w
    return a_rot + b_rot[1:-1]


def _has_edge(cycle, u, w):
    n = len(cycle)
    return any(cycle[k] == u and cycle[(k + 1) % n] == w for k in range(n))


def convex_decompose(polygon: Polygon) -> list:
    """Steiner-free convex partition: triangulate, then greedily drop diagonals.

    Diagonals are visited lowest-index-first and removed whenever the two
    incident parts merge into a convex polygon (Hertel-Mehlhorn).
    """
    if not isinstance(polygon, Polygon):
        raise InvalidGeometry("convex_decompose expects a Polygon")
    v = polygon.vertices
    if polygon.is_convex():
        return [ConvexPart(polygon, 1)]
    parts = [list(t) for t in triangulate(polygon)]
    merged = True
    while merged:
        merged = False
        diagonals = set()
        for cyc in parts:
            n = len(cyc)
            for k in range(n):
                u, w = cyc[k], cyc[(k + 1) % n]
                if (w - u) % len(v) not in (1, len(v) - 1):
                    diagonals.add((min(u, w), max(u, w)))
        for u, w in sorted(diagonals):
            pa = next(c for c in parts if _has_edge(c, u, w))
            pb = next(c for c in parts if _has_edge(c, w, u))
            cand = _merge_cycles(pa, pb, u, w)
            if _is_convex_idx(cand, v):
                parts.remove(pa)
                parts.remove(pb)
                parts.append(cand)
                merged = True
                break
    parts.sort(key=lambda c: sorted(c))
    out = []
    for f, cyc in enumerate(parts, start=1):
        start = cyc.index(min(cyc))
        cyc = cyc[start:] + cyc[:start]
        out.append(ConvexPart(make_polygon([v[k] for k in cyc]), f))
    return out


# ---------------------------------------------------------------------------
# Minkowski sums and no-fit polygons


def _lowest_first(pts):
    """Rotate so the first vertex has the smallest y (ties: smallest x).

    Starting at the bottom-left vertex guarantees the first edge direction is in
    [0, pi) and the incoming one in (pi, 2pi), which the merge loop relies on.
    """
    k = min(range(len(pts)), key=lambda m: (pts[m][1], pts[m][0]))
    return list(pts[k:]) + list(pts[:k])


def convex_minkowski_sum(boundary_a, boundary_b) -> Polygon:
    pa = boundary_a if isinstance(boundary_a, Polygon) else make_polygon(boundary_a)
    pb = boundary_b if isinstance(boundary_b, Polygon) else make_polygon(boundary_b)
    if not pa.is_convex() or not pb.is_convex():
        raise InvalidGeometry("convex_minkowski_sum requires convex inputs")
    a = _lowest_first(pa.vertices)
    b = _lowest_first(pb.vertices)
    n, m = len(a), len(b)
    out = []
    i = j = 0
    while i < n or j < m:
        ai, bj = a[i % n], b[j % m]
        out.append((ai[0] + bj[0], ai[1] + bj[1]))
        ea = (a[(i + 1) % n][0] - ai[0], a[(i + 1) % n][1] - ai[1])
        eb = (b[(j + 1) % m][0] - bj[0], b[(j + 1) % m][1] - bj[1])
        theta = ea[0] * eb[1] - eb[0] * ea[1]
        if theta >= 0:
            i += 1
        if theta <= 0:
            j += 1
    return make_polygon(out)


def convex_nfp(static_part, orbiting_part, orbiting_ref=(0.0, 0.0)) -> Polygon:
    """No-fit polygon of ``orbiting_part`` around ``static_part``.

    The orbiting boundary is moved so that its reference point sits at the
    origin and then reflected through it; the reflection is a half-turn, so
    the orientation stays counter-clockwise.
    """
    a = static_part.polygon if isinstance(static_part, ConvexPart) else static_part
    b = orbiting_part.polygon if isinstance(orbiting_part, ConvexPart) else orbiting_part
    rx, ry = orbiting_ref
    neg_b = [(rx - x, ry - y) for x, y in b.vertices]
    return convex_minkowski_sum(a, neg_b)


# ---------------------------------------------------------------------------
# overlap / containment tests for convex polygons


def _axes(poly: Polygon):
    out = []
    for (x0, y0), (x1, y1) in poly.edges:
        dx, dy = x1 - x0, y1 - y0
        norm = math.hypot(dx, dy)
        out.append((dy / norm, -dx / norm))  # outward normal for CCW
    return out


def _project(poly: Polygon, axis):
    vals = [x * axis[0] + y * axis[1] for x, y in poly.vertices]
    return min(vals), max(vals)


def separation(p: Polygon, q: Polygon) -> float:
    """Signed separation along the best edge-normal axis.

    Positive: gap between the polygons.  Negative: minus the penetration depth.
    """
    best = -math.inf
    for axis in _axes(p) + _axes(q):
        p0, p1 = _project(p, axis)
        q0, q1 = _project(q, axis)
        gap = max(q0 - p1, p0 - q1)
        if gap > best:
            best = gap
    return best


def _require_convex(*polys):
    for poly in polys:
        if not poly.is_convex():
            raise InvalidGeometry("overlap tests need convex polygons; decompose first")


def polygons_overlap(p: Polygon, q: Polygon, eps=EPS_GEOM) -> bool:
    """True iff the interiors intersect; shared boundaries do not count."""
    _require_convex(p, q)
    return separation(p, q) < -eps


def penetration_depth(p: Polygon, q: Polygon) -> float:
    _require_convex(p, q)
    return max(0.0, -separation(p, q))


def closed_disjoint(p: Polygon, q: Polygon, eps=EPS_GEOM) -> bool:
    """True iff the closed sets are apart by more than ``eps``."""
    _require_convex(p, q)
    return separation(p, q) > eps


def point_in_convex(point, poly: Polygon, eps=EPS_GEOM) -> bool:
    v = poly.vertices
    n = len(v)
    return all(_turn(v[k], v[(k + 1) % n], point) >= -eps for k in range(n))


def convex_contains(outer: Polygon, inner: Polygon, eps=EPS_GEOM) -> bool:
    return all(point_in_convex(p, outer, eps) for p in inner.vertices)


def clip_halfplane(points, a, b, c):
    """Keep the part of a convex vertex cycle with ``a*x + b*y <= c``."""
    out = []
    n = len(points)
    for k in range(n):
        p, q = points[k], points[(k + 1) % n]
        fp = a * p[0] + b * p[1] - c
        fq = a * q[0] + b * q[1] - c
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def rectangle(x0, y0, x1, y1) -> Polygon:
    return Polygon(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))
