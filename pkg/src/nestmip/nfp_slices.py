"""Edge classification of convex NFP parts and the vertical-slice decomposition
of their feasible complement.

For every convex NFP part the complement inside a bounding window is split
into a left slab, a right slab and one vertical slice above each top edge or
below each bottom edge.  Each slice later becomes one binary variable.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import InvalidGeometry, InvalidWindow
from .geometry import (
    EPS_GEOM,
    Interval,
    Polygon,
    clip_halfplane,
    make_polygon,
    point_in_convex,
)


class EdgeClass(enum.Enum):
    TOP = "t"
    BOTTOM = "b"
    SIDE = "s"


@dataclass(frozen=True)
class NfpEdge:
    k: int  # 1-based position on the boundary
    a: tuple
    b: tuple
    cls: EdgeClass

    @property
    def rhs_constant(self) -> float:
        """``b_y*a_x - b_x*a_y``; the edge line is ``dy_coef*y + dx_coef*x + C = 0``."""
        return self.b[1] * self.a[0] - self.b[0] * self.a[1]


@dataclass(frozen=True)
class NfpPart:
    i: int
    j: int
    f: int
    g: int
    boundary: Polygon
    edges: tuple
    x_min: float
    x_max: float

    @property
    def key(self):
        return (self.i, self.j, self.f, self.g)

    @property
    def top_edges(self):
        return [e for e in self.edges if e.cls is EdgeClass.TOP]

    @property
    def bottom_edges(self):
        return [e for e in self.edges if e.cls is EdgeClass.BOTTOM]

    @property
    def side_edges(self):
        return [e for e in self.edges if e.cls is EdgeClass.SIDE]


def classify_boundary_edges(nfp: Polygon, i=0, j=0, f=0, g=0, eps=EPS_GEOM) -> NfpPart:
    if not nfp.is_convex():
        raise InvalidGeometry("NFP boundary must be convex")
    edges = []
    for k, (a, b) in enumerate(nfp.edges, start=1):
        if abs(a[0] - b[0]) <= eps:
            cls = EdgeClass.SIDE
        elif a[0] > b[0]:
            cls = EdgeClass.TOP
        else:
            cls = EdgeClass.BOTTOM
        edges.append(NfpEdge(k, a, b, cls))
    xs = [p[0] for p in nfp.vertices]
    return NfpPart(i, j, f, g, nfp, tuple(edges), min(xs), max(xs))


class RegionKind(enum.Enum):
    LEFT = "l"
    RIGHT = "r"
    TOP = "t"
    BOTTOM = "b"
    EDGE = "e"  # outer half-plane of one edge, or a wedge of it


@dataclass(frozen=True)
class FeasibleSubRegion:
    kind: RegionKind
    edge_index: int | None
    clip_polygon: Polygon
    x_span: Interval

    @property
    def key(self) -> str:
        if self.edge_index is None:
            return self.kind.value
        return f"{self.kind.value}{self.edge_index}"

    def contains(self, point, eps=EPS_GEOM) -> bool:
        return point_in_convex(point, self.clip_polygon, eps)


def _window_cycle(window_x: Interval, window_y: Interval):
    return [
        (window_x.lo, window_y.lo),
        (window_x.hi, window_y.lo),
        (window_x.hi, window_y.hi),
        (window_x.lo, window_y.hi),
    ]


def _outside_halfplane(a, b):
    """Coefficients (A, B, C) of ``A*x + B*y <= C`` = right side of a -> b."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    return -dy, dx, dx * a[1] - dy * a[0]


def _region(kind, k, cycle):
    poly = make_polygon(cycle)
    xs = [p[0] for p in poly.vertices]
    return FeasibleSubRegion(kind, k, poly, Interval(min(xs), max(xs)))


def _check_window(part: NfpPart, window_x: Interval, window_y: Interval):
    x0, y0, x1, y1 = part.boundary.bbox()
    if not (window_x.lo < x0 and x1 < window_x.hi and window_y.lo < y0 and y1 < window_y.hi):
        raise InvalidWindow(
            f"window {window_x}x{window_y} does not strictly contain NFP bbox {(x0, y0, x1, y1)}"
        )


def build_subregions(part: NfpPart, window_x: Interval, window_y: Interval) -> list:
    """Left, right, then one slice per top/bottom edge in boundary order.

    Side edges get no region of their own; the left/right slabs absorb them.
    """
    _check_window(part, window_x, window_y)
    win = _window_cycle(window_x, window_y)
    out = [
        _region(RegionKind.LEFT, None, clip_halfplane(win, 1.0, 0.0, part.x_min)),
        _region(RegionKind.RIGHT, None, clip_halfplane(win, -1.0, 0.0, -part.x_max)),
    ]
    for e in part.edges:
        if e.cls is EdgeClass.SIDE:
            continue
        lo, hi = sorted((e.a[0], e.b[0]))
        cyc = clip_halfplane(win, 1.0, 0.0, hi)
        cyc = clip_halfplane(cyc, -1.0, 0.0, -lo)
        cyc = clip_halfplane(cyc, *_outside_halfplane(e.a, e.b))
        kind = RegionKind.TOP if e.cls is EdgeClass.TOP else RegionKind.BOTTOM
        out.append(_region(kind, e.k, cyc))
    return out


def build_edge_regions(part: NfpPart, window_x: Interval, window_y: Interval) -> list:
    """One (overlapping) outer half-plane per boundary edge, clipped to the window."""
    _check_window(part, window_x, window_y)
    win = _window_cycle(window_x, window_y)
    return [
        _region(RegionKind.EDGE, e.k, clip_halfplane(win, *_outside_halfplane(e.a, e.b)))
        for e in part.edges
    ]


def build_wedge_regions(part: NfpPart, window_x: Interval, window_y: Interval) -> list:
    """Disjoint wedges: outside edge ``k`` but not outside edge ``k-1``.

    A point outside a convex polygon is outside a cyclic run of consecutive
    edges; the wedge of edge ``k`` holds the points whose run starts at ``k``.
    """
    _check_window(part, window_x, window_y)
    win = _window_cycle(window_x, window_y)
    out = []
    n = len(part.edges)
    for idx, e in enumerate(part.edges):
        prev = part.edges[idx - 1] if n > 1 else e
        cyc = clip_halfplane(win, *_outside_halfplane(e.a, e.b))
        a, b, c = _outside_halfplane(prev.a, prev.b)
        cyc = clip_halfplane(cyc, -a, -b, -c)
        out.append(_region(RegionKind.EDGE, e.k, cyc))
    return out


def standard_window(part: NfpPart, L_ub: float, H: float):
    """Relative-placement window ``[-Wx, Wx] x [-Wy, Wy]``.

    Every feasible relative position lies in ``[-L_ub, L_ub] x [-H, H]``; the
    window is widened a little so it also strictly contains the NFP.
    """
    x0, y0, x1, y1 = part.boundary.bbox()
    wx = max(L_ub, abs(x0), abs(x1))
    wy = max(H, abs(y0), abs(y1))
    wx += 1e-3 * max(wx, 1.0)
    wy += 1e-3 * max(wy, 1.0)
    return Interval(-wx, wx), Interval(-wy, wy)


def locate(regions, point, eps=0.0):
    """Indices of the regions whose closed clip polygon holds ``point``."""
    return [n for n, r in enumerate(regions) if r.contains(point, eps)]
