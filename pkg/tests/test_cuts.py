import itertools
import random

import pytest

from nestmip.builders import BuildOptions, ModelVariant, build_model, with_options
from nestmip.cuts import (
    RegionRelation,
    TripleCut,
    generate_triple_cuts,
    greedy_edge_clique_cover,
    identical_triple_groups,
    is_unfeasible_triple,
    region_relation,
    validate_triple_cut,
    write_cut_dump,
)
from nestmip.geometry import Interval, make_polygon
from nestmip.instance import build_instance
from nestmip.nfp_slices import FeasibleSubRegion, RegionKind, locate
from nestmip.solve import Placement, verify_placement

from conftest import SQUARE

HOUSE = [(0, 0), (2, 0), (2, 1), (1, 2), (0, 1)]
ZIGZAG = [(0, 0), (2, 0), (1.5, 1), (2, 2), (1.5, 3), (2, 4), (0, 4), (0.5, 3), (0, 2), (0.5, 1)]
STEEP = [(0, 0), (1, 0), (5, 4), (4, 4)]
VS_BARE = BuildOptions.bare()


def region(x0, y0, x1, y1, kind=RegionKind.LEFT):
    poly = make_polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
    return FeasibleSubRegion(kind, None, poly, Interval(x0, x1))


# -- identical pieces ------------------------------------------------------------

def test_two_identical_squares(two_squares):
    _, reg = build_model(two_squares, ModelVariant.NfpCmVsNc)
    rep = reg.reports["identical"]
    assert rep["ordering"] == 1 and rep["fixed"] == ["v_1_2_1_1_b1"]


def test_distinct_types_no_mutations():
    inst = build_instance("d", 3, [("h", HOUSE, 1), ("sq", SQUARE, 1), ("t", [(0, 0), (1, 0), (0, 1)], 1)])
    model, reg = build_model(inst, ModelVariant.NfpCmVsNc)
    rep = reg.reports["identical"]
    assert rep == {"ordering": 0, "fixed": [], "identical_rows": 0, "identical_pairs": 0}
    assert model.count_family("sym", "ident") == 0


def test_identical_triple_count_separated_chains():
    # house NFPs have vertical sides, so every top edge sits above every bottom edge
    inst = build_instance("abb", 4, [("h", HOUSE, 1), ("sq", SQUARE, 2)])
    model, reg = build_model(inst, ModelVariant.NfpCmVsNc, with_options(VS_BARE, symmetry=True,
                                                                       identical_triples=True))
    p12, p13 = reg.parts[(1, 2)][0], reg.parts[(1, 3)][0]
    expected = len(p12.top_edges) * len(p13.bottom_edges)
    assert expected >= 2
    assert reg.reports["identical"]["identical_pairs"] == expected
    assert reg.reports["identical"]["identical_rows"] == 1


def test_identical_triple_guard_keeps_feasible_layout():
    """On slanted NFPs a top and a bottom slice can coexist with y_j <= y_u."""
    inst = build_instance("cx", 9, [("big", [(0, 0), (1.2, 0), (5.2, 4), (4, 4)], 1), ("par", STEEP, 2)])
    pos = ((4.157, 2.936), (0.178, 0.755), (6.668, 3.948))
    L = max(x + inst.piece_type(i).l_max for i, (x, _) in enumerate(pos, start=1))
    assert verify_placement(inst, Placement(pos, L)).ok and pos[1][1] <= pos[2][1]
    _, reg = build_model(inst, ModelVariant.NfpCmVsNc, VS_BARE)

    def hit(i, j, kind):
        es = [e for e in reg.entries[(i, j, 1, 1)] if e.kind is kind]
        X, Y = pos[j - 1][0] - pos[i - 1][0], pos[j - 1][1] - pos[i - 1][1]
        found = locate([e.region for e in es], (X, Y), -1e-9)
        assert len(found) == 1
        return found[0], es

    t, tops = hit(1, 2, RegionKind.TOP)
    b, bots = hit(1, 3, RegionKind.BOTTOM)
    _, pairs = identical_triple_groups(tops, bots)
    assert (t, b) not in pairs  # the unrestricted row would cut this layout off
    assert len(pairs) < len(tops) * len(bots)


def test_identical_triple_groups_thresholds():
    class E:
        def __init__(self, ya, yb):
            self.edge = type("Edge", (), {"a": (0, ya), "b": (1, yb)})

    tops = [E(3, 2), E(1, 0.5)]
    bots = [E(-1, 0), E(0, 2)]
    blocks, pairs = identical_triple_groups(tops, bots)
    # top 0 (min y 2) clears both bottoms (max y 0 and 2 is not < 2); top 1 clears bottom 0 only
    assert pairs == {(0, 0), (1, 0)}
    assert blocks == [((0, 1), (0,))]


# -- merges ----------------------------------------------------------------------

def test_three_stacked_parts_merge():
    inst = build_instance("z", 5, [("z", ZIGZAG, 1), ("sq", SQUARE, 1)])
    assert len(inst.piece_type(1).convex_parts) == 3
    model, reg = build_model(inst, ModelVariant.NfpCmVsNc, with_options(VS_BARE, merge_sides=True))
    assert reg.reports["merge"] == {"left": 2, "right": 2}
    lefts = {e.var for e in reg.pair_entries(1, 2) if e.kind is RegionKind.LEFT}
    assert len(lefts) == 1
    assert model.count_family("slab") == 2


def test_single_part_pair_no_merge(two_squares):
    _, reg = build_model(two_squares, ModelVariant.NfpCmVsNc)
    assert reg.reports["merge"] == {"left": 0, "right": 0}


def test_different_extremes_kept():
    inst = build_instance("l", 3, [("L", [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)], 1), ("sq", SQUARE, 1)])
    _, reg = build_model(inst, ModelVariant.NfpCmVsNc)
    assert reg.reports["merge"]["right"] == 0
    assert reg.reports["merge"]["left"] == 1  # both L parts start at x = 0


# -- region relations and cliques ----------------------------------------------------

def test_region_relation_cases():
    big = region(0, 0, 4, 4)
    assert region_relation(big, region(1, 1, 2, 2)) is RegionRelation.SUBSUMES
    assert region_relation(region(1, 1, 2, 2), big) is RegionRelation.SUBSUMED
    assert region_relation(big, region(0, 0, 4, 4)) is RegionRelation.IDENTICAL
    assert region_relation(big, region(5, 0, 6, 1)) is RegionRelation.DISJOINT
    assert region_relation(big, region(4, 0, 6, 1)) is RegionRelation.OVERLAPPING  # touching only
    assert region_relation(big, region(3, 3, 6, 6)) is RegionRelation.OVERLAPPING


def test_single_part_pairs_get_no_relation_cuts(synthetic):
    for inst in synthetic:
        if any(len(t.convex_parts) > 1 for t in inst.piece_types):
            continue
        model, reg = build_model(inst, ModelVariant.NfpCmVsNc)
        assert model.count_family("subsume") == 0 and not model.sos1_sets


def test_lshape_relations_are_geometric(synthetic):
    """Each subsumption row and clique matches the clip-polygon geometry."""
    inst = next(i for i in synthetic if i.name == "syn_lshape_pair")
    model, reg = build_model(inst, ModelVariant.NfpCmVsNc, with_options(VS_BARE, subsumption=True, cliques=True))
    regions = reg.var_regions()
    rows = [c for c in model.constraints if c.family == "subsume"]
    assert rows and model.sos1_sets
    for c in rows:
        sup = next(v for v, a in c.terms.items() if a < 0)
        for v, a in c.terms.items():
            if a > 0:
                rel = region_relation(regions[sup][0].region, regions[v][0].region)
                assert rel in (RegionRelation.SUBSUMES, RegionRelation.IDENTICAL)
    for s in model.sos1_sets:
        for a, b in itertools.combinations(s.members, 2):
            assert region_relation(regions[a][0].region, regions[b][0].region) is RegionRelation.DISJOINT


@pytest.mark.parametrize("seed", range(30))
def test_clique_cover_soundness(seed):
    rng = random.Random(seed)
    nodes = list(range(rng.randint(2, 12)))
    edges = [(a, b) for a, b in itertools.combinations(nodes, 2) if rng.random() < 0.5]
    cliques = greedy_edge_clique_cover(nodes, edges)
    es = {frozenset(e) for e in edges}
    for c in cliques:
        assert all(frozenset(p) in es for p in itertools.combinations(c, 2))
    covered = {frozenset(p) for c in cliques for p in itertools.combinations(c, 2)}
    assert es <= covered
    assert cliques == greedy_edge_clique_cover(nodes, edges)


def test_single_edge_cover():
    assert greedy_edge_clique_cover(["a", "b"], [("b", "a")]) == [["a", "b"]]


# -- triple cuts -----------------------------------------------------------------------

@pytest.mark.parametrize("ij, ju, iu, expected", [
    ((2, 4), (1, 2), (7, 8), True),
    ((2, 4), (1, 2), (5, 7), False),
    ((0, 0), (1, 1), (1, 1), False),
])
def test_unfeasible_triple_examples(ij, ju, iu, expected):
    assert is_unfeasible_triple(Interval(*ij), Interval(*iu), Interval(*ju)) is expected


def test_no_triple_cuts_for_two_pieces(two_squares):
    _, reg = build_model(two_squares, ModelVariant.NfpCmVs)
    assert generate_triple_cuts(reg) == []


def test_triple_cuts_sound_on_grid(synthetic):
    """Every excluded combination fails an exhaustive 1e-3 grid over the first span."""
    for inst in synthetic:
        if inst.N < 3:
            continue
        model, reg = build_model(inst, ModelVariant.NfpCmVs)
        for cut in reg.reports.get("triple_cuts", []):
            assert validate_triple_cut(cut, reg, samples=100)
            find = lambda key, k: next(e.region for e in reg.entries[key] if e.region.key == k)
            r_ij = find((cut.i, cut.j, cut.f, cut.g), cut.k_ij)
            r_iu = find((cut.i, cut.u, cut.f, cut.h), cut.k_iu)
            lo, hi = r_ij.x_span.lo, r_ij.x_span.hi
            steps = 1000  # resolution 1e-3 of the span
            for k in cut.k_ju:
                r_ju = find((cut.j, cut.u, cut.g, cut.h), k)
                for n in range(steps + 1):
                    s = lo + (hi - lo) * n / steps
                    a, b = s + r_ju.x_span.lo, s + r_ju.x_span.hi
                    assert b < r_iu.x_span.lo - 1e-9 or a > r_iu.x_span.hi + 1e-9


def test_triple_cuts_are_user_rows_in_order(synthetic):
    inst = next(i for i in synthetic if i.name == "syn_four_mixed")
    model, reg = build_model(inst, ModelVariant.NfpCmVs)
    cuts = reg.reports["triple_cuts"]
    assert cuts
    keys = [(c.i, c.j, c.u, c.f, c.g, c.h) for c in cuts]
    assert keys == sorted(keys)
    rows = model.user_cuts()
    assert [r.name for r in rows] == [f"UCUT_{n}" for n in range(1, len(cuts) + 1)]
    assert all(r.rhs == 2 and r.family == "triple" for r in rows)
    _, reg_nc = build_model(inst, ModelVariant.NfpCmVsNc)
    assert "triple_cuts" not in reg_nc.reports


def test_cut_cap_warns(synthetic):
    inst = next(i for i in synthetic if i.name == "syn_four_mixed")
    _, reg = build_model(inst, ModelVariant.NfpCmVs)
    total = len(reg.reports["triple_cuts"])
    assert total > 2
    with pytest.warns(UserWarning, match="cap"):
        _, capped = build_model(inst, ModelVariant.NfpCmVs, BuildOptions(cut_cap=2))
    assert capped.reports["triple_cuts"] == reg.reports["triple_cuts"][:2]


def test_cut_dump(tmp_path):
    cut = TripleCut(1, 2, 3, 1, 1, 1, "r", "l", ("l", "t2"), "v_a", "v_b", ("v_c", "v_d"))
    path = tmp_path / "cuts.txt"
    write_cut_dump([cut], path)
    assert path.read_text() == "v_a + v_b + v_c + v_d <= 2\n"
    assert cut.terms() == {"v_a": 1.0, "v_b": 1.0, "v_c": 1.0, "v_d": 1.0}


def test_sampling_oracle_rejects_a_bad_cut(synthetic):
    inst = next(i for i in synthetic if i.name == "syn_four_mixed")
    _, reg = build_model(inst, ModelVariant.NfpCmVs)
    cut = reg.reports["triple_cuts"][0]
    # excluding every (j, u) region at once cannot be valid
    keys = [e.region.key for e in reg.entries[(cut.j, cut.u, cut.g, cut.h)]]
    assert keys
    wide = TripleCut(cut.i, cut.j, cut.u, cut.f, cut.g, cut.h, cut.k_ij, cut.k_iu, tuple(keys),
                     cut.v_ij, cut.v_iu, ())
    assert not validate_triple_cut(wide, reg)
