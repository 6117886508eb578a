import csv
import xml.etree.ElementTree as ET

import pytest

from nestmip import bundled_instances
from nestmip.bench import (
    CSV_COLUMNS,
    MISSING,
    BenchConfig,
    BenchRow,
    RunRecord,
    efficiency,
    performance_profile,
    read_csv,
    run_benchmark,
    tables_from_results,
    time_ratios,
    write_csv,
    write_status,
)
from nestmip.builders import ModelVariant
from nestmip.errors import InputError
from nestmip.solve import Limits, Placement
from nestmip.svg import render_svg


def rho(points, model, tau):
    return next(p.rho for p in points if p.model == model and p.tau == tau)


def test_profile_two_models_one_instance():
    pts = performance_profile({"m1": {"a": (2.0, True)}, "m2": {"a": (4.0, True)}})
    assert rho(pts, "m1", 1.0) == 1.0
    assert rho(pts, "m2", 1.0) == 0.0
    assert rho(pts, "m2", 2.0) == 1.0


def test_profile_unsolved_model():
    tables = {"good": {"a": (1.0, True), "b": (3.0, True)}, "bad": {"a": (5.0, False), "b": (5.0, False)}}
    ratios, r_M = time_ratios(tables)
    assert r_M == 2.0  # twice the largest finite ratio, which is 1
    pts = performance_profile(tables)
    assert all(p.rho == 0.0 for p in pts if p.model == "bad" and p.tau < r_M)
    assert rho(pts, "bad", r_M) == 1.0


def test_profile_identical_times():
    tables = {m: {"a": (3.0, True), "b": (1.0, True)} for m in ("x", "y", "z")}
    pts = performance_profile(tables)
    assert {p.rho for p in pts if p.tau == 1.0} == {1.0}


def test_profile_explicit_r_m():
    ratios, r_M = time_ratios({"a": {"i": (1.0, True)}, "b": {"i": (1.0, False)}}, r_M=10.0)
    assert r_M == 10.0 and ratios["b"]["i"] == 10.0


def test_profile_mismatched_sets():
    with pytest.raises(InputError):
        performance_profile({"a": {"x": (1.0, True)}, "b": {"y": (1.0, True)}})


def test_csv_round_trip(tmp_path):
    rows = [
        BenchRow("a", 3, 0.75, 1.5, 2.0, 0.25, 12, 40, 1234, 3.25),
        BenchRow("b", 5, None, None, None, None, 30, 0, 0, 3600.0),
    ]
    path = tmp_path / "m.csv"
    write_csv(rows, path)
    with open(path) as fh:
        lines = list(csv.reader(fh))
    assert tuple(lines[0]) == CSV_COLUMNS and len(CSV_COLUMNS) == 10
    assert all(len(line) == 10 for line in lines)
    assert lines[2][2] == MISSING
    assert read_csv(path) == rows


def test_unverified_optimum_is_not_solved(tmp_path):
    rows = [BenchRow("a", 2, 0.5, 2.0, 2.0, 0.0, 4, 1, 1, 1.0), BenchRow("b", 2, 0.5, 2.0, 2.0, 0.0, 4, 1, 1, 1.0)]
    write_csv(rows, tmp_path / "m.csv")
    write_status([RunRecord(rows[0], "Optimal", verified=True), RunRecord(rows[1], "Optimal", verified=False)],
                 tmp_path / "m.status.csv")
    assert tables_from_results([str(tmp_path / "m.csv")])["m"] == {"a": (1.0, True), "b": (1.0, False)}


def test_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("instance,time\nx,1\n")
    with pytest.raises(InputError):
        read_csv(path)


def test_efficiency(two_squares):
    assert efficiency(two_squares, 2.0) == 1.0
    assert efficiency(two_squares, 4.0) == 0.5
    assert efficiency(two_squares, None) is None


def test_svg_structure(two_squares):
    text = render_svg(two_squares, Placement(((0, 0), (1, 0)), 2.0))
    root = ET.fromstring(text)
    ns = "{http://www.w3.org/2000/svg}"
    assert root.get("version") == "1.1"
    assert root.find(f"{ns}rect").get("fill") == "none"
    polys = root.findall(f"{ns}polygon")
    assert len(polys) == 2 and all(p.get("fill-opacity") == "0.5" for p in polys)
    assert [t.text for t in root.findall(f"{ns}text")] == ["1", "2"]


def test_run_benchmark_enumerator(tmp_path):
    paths = [p for p in bundled_instances() if p.endswith(("syn_two_squares.json", "syn_triangles.json"))]
    paths.append(str(tmp_path / "missing.json"))
    (tmp_path / "missing.json").write_text("{not json")
    cfg = BenchConfig(paths, (ModelVariant.NfpCmVs, ModelVariant.NfpCmNc), Limits(time_s=60),
                      str(tmp_path / "out"), enumerate=True)
    results = run_benchmark(cfg)
    assert set(results) == {"NFP-CM-VS", "NFP-CMnc"}
    for variant, records in results.items():
        rows = read_csv(tmp_path / "out" / f"{variant}.csv")
        assert [r.instance for r in rows] == ["syn_triangles", "syn_two_squares", "missing"]
        assert records[2].status.startswith("error")
        for rec in records[:2]:
            assert rec.status == "Optimal" and rec.verified
            assert rec.row.gap == 0.0
            assert (tmp_path / "out" / variant / f"{rec.row.instance}.svg").exists()
    tables = tables_from_results([str(tmp_path / "out" / f"{v}.csv") for v in results])
    pts = performance_profile(tables)
    for m in tables:
        series = [p.rho for p in pts if p.model == m]
        assert series == sorted(series)
