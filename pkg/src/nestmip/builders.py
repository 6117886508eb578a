"""Assemble the six MIP variants from a problem instance.

Relative placement of piece ``j`` with respect to piece ``i`` is
``(X, Y) = (x_j - x_i, y_j - y_i)``.  Every convex NFP part between a convex
part of ``i`` and one of ``j`` gets a family of mutually exclusive binaries,
one per feasible region of its complement; which regions are used, and which
linear rows switch them on, is what distinguishes the variants.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace

from . import cuts as _cuts
from .errors import InfeasibleInstance
from .geometry import EPS_GEOM, convex_nfp
from .instance import ProblemInstance
from .mip_ir import BINARY, CONTINUOUS, MipModel
from .nfp_slices import (
    EdgeClass,
    NfpPart,
    RegionKind,
    build_edge_regions,
    build_subregions,
    build_wedge_regions,
    classify_boundary_edges,
    standard_window,
)

log = logging.getLogger(__name__)


class ModelVariant(enum.Enum):
    NfpCmNc = "NFP-CMnc"
    NfpCm = "NFP-CM"
    ImprovedNfpCm = "Improved-NFP-CM"
    NfpCmVsNc = "NFP-CM-VSnc"
    NfpCmVs = "NFP-CM-VS"
    NfpCmVs2 = "NFP-CM-VS2"

    @classmethod
    def parse(cls, value) -> "ModelVariant":
        if isinstance(value, cls):
            return value
        key = str(value).replace("_", "").replace("-", "").replace(" ", "").lower()
        for v in cls:
            if key in (v.name.lower(), v.value.replace("-", "").lower()):
                return v
        raise ValueError(f"unknown model variant {value!r}; choose from {[v.value for v in cls]}")

    @property
    def vertical_slices(self) -> bool:
        return self in (ModelVariant.NfpCmVsNc, ModelVariant.NfpCmVs, ModelVariant.NfpCmVs2)


ALL_VARIANTS = tuple(ModelVariant)


@dataclass(frozen=True)
class BuildOptions:
    """Switches for the optional reductions and cuts.

    Each switch only matters for the variants that use that family.  The
    eliminations and identical-piece rows rely on the y ordering, so turning
    ``symmetry`` off disables them as well.
    """

    symmetry: bool = True
    eliminate: bool = True
    identical_triples: bool = True
    merge_sides: bool = True
    subsumption: bool = True
    cliques: bool = True
    triple_cuts: bool = True
    cut_cap: int | None = None

    @classmethod
    def bare(cls) -> "BuildOptions":
        return cls(False, False, False, False, False, False, False)


@dataclass
class RegionEntry:
    part: NfpPart
    region: object  # FeasibleSubRegion
    var: str | None  # current variable; None once eliminated

    @property
    def kind(self) -> RegionKind:
        return self.region.kind

    @property
    def edge(self):
        k = self.region.edge_index
        return None if k is None else self.part.edges[k - 1]


@dataclass
class Registry:
    instance: ProblemInstance
    variant: ModelVariant
    parts: dict = field(default_factory=dict)  # (i, j) -> [NfpPart] in (f, g) order
    entries: dict = field(default_factory=dict)  # (i, j, f, g) -> [RegionEntry]
    windows: dict = field(default_factory=dict)  # (i, j, f, g) -> (Interval, Interval)
    reports: dict = field(default_factory=dict)

    @property
    def all_parts(self):
        return [p for ps in self.parts.values() for p in ps]

    def pair_entries(self, i, j):
        return [e for p in self.parts.get((i, j), []) for e in self.entries[p.key]]

    def active(self, key):
        return [e for e in self.entries.get(key, []) if e.var is not None]

    def var_regions(self) -> dict:
        out = {}
        for es in self.entries.values():
            for e in es:
                if e.var is not None:
                    out.setdefault(e.var, []).append(e)
        return out

    def selection_groups(self):
        """Active binaries of each NfpPart; exactly one of each group is 1."""
        return [[e.var for e in self.active(p.key)] for p in self.all_parts]


def var_name(i, j, f, g, region_key) -> str:
    return f"v_{i}_{j}_{f}_{g}_{region_key}"


def _tag(i, j, f, g):
    return f"{i}_{j}_{f}_{g}"


def compute_nfp_parts(instance: ProblemInstance) -> dict:
    """All convex NFP parts keyed by piece pair, origin at the reference of ``i``."""
    cache = {}
    out = {}
    for i in range(1, instance.N + 1):
        ti = instance.piece_type(i)
        for j in range(i + 1, instance.N + 1):
            tj = instance.piece_type(j)
            parts = []
            for f, pf in enumerate(ti.convex_parts, start=1):
                for g, pg in enumerate(tj.convex_parts, start=1):
                    key = (ti.type_id, tj.type_id, f, g)
                    if key not in cache:
                        cache[key] = convex_nfp(pf, pg)
                    parts.append(classify_boundary_edges(cache[key], i, j, f, g))
            out[(i, j)] = parts
    return out


class _Builder:
    def __init__(self, instance, variant, options):
        self.inst = instance
        self.variant = variant
        self.opt = options
        self.L_ub = instance.L_ub
        self.H = instance.H
        self.model = MipModel(name=f"{instance.name}_{variant.value}")
        self.reg = Registry(instance, variant)

    def run(self):
        self._check()
        self._base()
        for (i, j), parts in compute_nfp_parts(self.inst).items():
            self.reg.parts[(i, j)] = parts
            for part in parts:
                self._part(part)
        self._extras()
        return self.model, self.reg

    def _check(self):
        for t in self.inst.piece_types:
            if t.height > self.H + EPS_GEOM:
                raise InfeasibleInstance(
                    f"piece {t.name!r} has height {t.height} > board height {self.H}"
                )

    def _base(self):
        m, inst = self.model, self.inst
        m.add_var("L", CONTINUOUS, inst.L_lb, inst.L_ub)
        m.objective["L"] = 1.0
        for i in range(1, inst.N + 1):
            t = inst.piece_type(i)
            m.add_var(f"x_{i}", CONTINUOUS, t.l_min, max(t.l_min, inst.L_ub - t.l_max))
            m.add_var(f"y_{i}", CONTINUOUS, t.h_min, max(t.h_min, self.H - t.h_max))
        for i in range(1, inst.N + 1):
            t = inst.piece_type(i)
            m.add_constr(f"cont_{i}", {f"x_{i}": 1.0, "L": -1.0}, "<=", -t.l_max, family="contain")

    # -- per NfpPart ---------------------------------------------------------
    def _part(self, part: NfpPart):
        wx, wy = standard_window(part, self.L_ub, self.H)
        self.reg.windows[part.key] = (wx, wy)
        if self.variant.vertical_slices:
            regions = build_subregions(part, wx, wy)
        elif self.variant is ModelVariant.ImprovedNfpCm:
            regions = build_wedge_regions(part, wx, wy)
        else:
            regions = build_edge_regions(part, wx, wy)
        entries = []
        for r in regions:
            name = self.model.add_var(var_name(*part.key, r.key), BINARY)
            entries.append(RegionEntry(part, r, name))
        self.reg.entries[part.key] = entries
        tag = _tag(*part.key)
        self.model.add_constr(f"sel_{tag}", {e.var: 1.0 for e in entries}, "=", 1.0, family="select")
        for e in entries:
            if e.edge is not None:
                self._edge_row(part, e.edge, e.var, f"edge_{tag}_{e.region.key}", "edge")
        if self.variant is ModelVariant.ImprovedNfpCm:
            n = len(part.edges)
            for e in entries:
                prev = part.edges[(e.edge.k - 2) % n]
                self._edge_row(part, prev, e.var, f"prev_{tag}_{e.region.key}", "prev_edge", inner=True)
        if self.variant in (ModelVariant.NfpCmVsNc, ModelVariant.NfpCmVs):
            self._slice_rows(part, entries, tag)
        elif self.variant is ModelVariant.NfpCmVs2:
            self._vs2_rows(part, entries, tag)

    def _vars(self, part):
        return f"x_{part.i}", f"y_{part.i}", f"x_{part.j}", f"y_{part.j}"

    def _edge_row(self, part, edge, v, name, family, inner=False):
        """Outer side of ``edge`` when ``v`` = 1 (inner side if ``inner``)."""
        xi, yi, xj, yj = self._vars(part)
        dx = edge.b[0] - edge.a[0]
        dy = edge.b[1] - edge.a[1]
        C = edge.rhs_constant
        s = -1.0 if inner else 1.0
        M = abs(dx) * self.H + abs(dy) * self.L_ub + s * C
        terms = {yj: s * dx, yi: -s * dx, xj: -s * dy, xi: s * dy, v: M}
        self.model.add_constr(name, terms, "<=", M - s * C, family=family, owner=v)

    def _x_range(self, part):
        ti = self.inst.piece_type(part.i)
        tj = self.inst.piece_type(part.j)
        # bounds on X = x_j - x_i implied by containment and L <= L_ub
        lo = tj.l_min - (self.L_ub - ti.l_max)
        hi = (self.L_ub - tj.l_max) - ti.l_min
        return lo, hi

    def _slice_rows(self, part, entries, tag):
        xi, _, xj, _ = self._vars(part)
        X_lo, X_hi = self._x_range(part)
        for e in entries:
            v = e.var
            if e.kind is RegionKind.LEFT:
                M = X_hi - part.x_min
                self.model.add_constr(f"slab_{tag}_l", {xj: 1.0, xi: -1.0, v: M}, "<=",
                                      M + part.x_min, family="slab", owner=v)
            elif e.kind is RegionKind.RIGHT:
                M = X_lo - part.x_max
                self.model.add_constr(f"slab_{tag}_r", {xj: 1.0, xi: -1.0, v: M}, ">=",
                                      M + part.x_max, family="slab", owner=v)
            else:
                lo, hi = sorted((e.edge.a[0], e.edge.b[0]))
                M1 = lo - X_lo
                self.model.add_constr(f"slo_{tag}_{e.region.key}", {xi: 1.0, xj: -1.0, v: M1},
                                      "<=", M1 - lo, family="slice", owner=v)
                M2 = X_hi - hi
                self.model.add_constr(f"shi_{tag}_{e.region.key}", {xj: 1.0, xi: -1.0, v: M2},
                                      "<=", M2 + hi, family="slice", owner=v)

    def _vs2_rows(self, part, entries, tag):
        xi, _, xj, _ = self._vars(part)
        X_lo, X_hi = self._x_range(part)
        lo_terms = {xj: 1.0, xi: -1.0}
        hi_terms = {xj: 1.0, xi: -1.0}
        for e in entries:
            if e.kind is RegionKind.LEFT:
                lo, hi = X_lo, part.x_min
            elif e.kind is RegionKind.RIGHT:
                lo, hi = part.x_max, X_hi
            else:
                lo, hi = sorted((e.edge.a[0], e.edge.b[0]))
            lo_terms[e.var] = -lo
            hi_terms[e.var] = -hi
        self.model.add_constr(f"vs2lo_{tag}", lo_terms, ">=", 0.0, family="vs2")
        self.model.add_constr(f"vs2hi_{tag}", hi_terms, "<=", 0.0, family="vs2")

    # -- variant extras --------------------------------------------------------
    def _extras(self):
        v, opt, m, reg = self.variant, self.opt, self.model, self.reg
        if v is ModelVariant.NfpCm:
            if opt.symmetry:
                reg.reports["ordering"] = _cuts.add_symmetry_ordering(reg, m, axis="x")
            if opt.cliques:
                reg.reports["relations"] = _cuts.pairwise_region_relation_cuts(
                    reg, m, subsumption=False, cliques=True)
        elif v is ModelVariant.ImprovedNfpCm:
            if opt.symmetry:
                reg.reports["ordering"] = _cuts.add_symmetry_ordering(reg, m, axis="y")
        elif v.vertical_slices:
            if opt.symmetry:
                reg.reports["identical"] = _cuts.apply_identical_piece_reductions(
                    reg, m, eliminate=opt.eliminate, triples=opt.identical_triples)
            if opt.merge_sides:
                reg.reports["merge"] = _cuts.merge_duplicate_side_vars(reg, m)
            if opt.subsumption or opt.cliques:
                reg.reports["relations"] = _cuts.pairwise_region_relation_cuts(
                    reg, m, subsumption=opt.subsumption, cliques=opt.cliques)
            if v is not ModelVariant.NfpCmVsNc and opt.triple_cuts:
                tc = _cuts.generate_triple_cuts(reg, cap=opt.cut_cap)
                _cuts.add_triple_cuts(m, tc)
                reg.reports["triple_cuts"] = tc


def build_model(instance: ProblemInstance, variant, options: BuildOptions | None = None):
    """Return ``(MipModel, Registry)`` for one of the six variants."""
    variant = ModelVariant.parse(variant)
    return _Builder(instance, variant, options or BuildOptions()).run()


def with_options(options: BuildOptions | None, **changes) -> BuildOptions:
    return replace(options or BuildOptions(), **changes)
