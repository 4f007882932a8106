"""Golden-file tests for every subcommand.

JSON output is compared after parsing, with a relative tolerance, so that
last-digit float formatting differences do not matter; SVG output is
compared byte for byte. Set TGRAPH_REGEN_GOLDEN=1 to rewrite the files."""
import io
import json
import math
import os
from pathlib import Path

import pytest

from tgraph.cli import EXIT_INVALID, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, dumps, main, round_sig

GOLDEN = Path(__file__).parent / "golden"
INPUTS = GOLDEN / "inputs"
REGEN = os.environ.get("TGRAPH_REGEN_GOLDEN") == "1"

TRI4_AREAS = "0.05,0.1,0.12,0.18"

CASES = {
    "validate_sq2": (["validate", "SQ2"], EXIT_OK),
    "validate_deg_plus": (["validate", "DEG-PLUS"], EXIT_INVALID),
    "graph_pin5": (["graph", "PIN5"], EXIT_OK),
    "graph_hex4": (["graph", "HEX4"], EXIT_OK),
    "kasteleyn_pin5": (["kasteleyn", "PIN5", "--verify", "--b0", "0"], EXIT_OK),
    "kasteleyn_sq3": (["kasteleyn", "SQ3", "--verify"], EXIT_OK),
    "shapes_pin5": (["shapes", "PIN5", str(INPUTS / "pin5_shapes.json")], EXIT_OK),
    "reconstruct_sq3": (["reconstruct", str(INPUTS / "sq3_graph.json"), str(INPUTS / "sq3_region.json")], EXIT_OK),
    "areas_sq2": (["areas", "SQ2", "--target", "0.3,0.7"], EXIT_OK),
    "areas_pin5": (["areas", "PIN5", "--target", "2.2,1.8,2.1,1.9,1.0"], EXIT_OK),
    "homology_tri4": (["homology", "TRI4", "--areas", TRI4_AREAS, "--sigma", "+-++"], EXIT_OK),
    "homology_sq2": (["homology", "SQ2", "--areas", "0.3,0.7"], EXIT_OK),
    "sectors_sq2": (["sectors", "SQ2", "--areas", "0.3,0.7"], EXIT_OK),
    "sectors_tri4": (["sectors", "TRI4", "--areas", TRI4_AREAS], EXIT_OK),
}


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def close(a, b, path="$"):
    """Structural equality with float tolerance; returns a mismatch path or None."""
    if isinstance(a, dict) and isinstance(b, dict):
        if set(a) != set(b):
            return f"{path}: keys {sorted(set(a) ^ set(b))}"
        for k in a:
            bad = close(a[k], b[k], f"{path}.{k}")
            if bad:
                return bad
        return None
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return f"{path}: length {len(a)} != {len(b)}"
        for i, (x, y) in enumerate(zip(a, b)):
            bad = close(x, y, f"{path}[{i}]")
            if bad:
                return bad
        return None
    if isinstance(a, float) or isinstance(b, float):
        if isinstance(a, (int, float)) and isinstance(b, (int, float)) and not isinstance(a, bool) \
                and math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-11):
            return None
        return f"{path}: {a!r} != {b!r}"
    return None if a == b else f"{path}: {a!r} != {b!r}"


def portable(doc):
    """Replace absolute input paths so golden files do not depend on the checkout."""
    text = json.dumps(doc).replace(str(INPUTS), "<inputs>")
    return json.loads(text)


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_json(name):
    argv, expected_code = CASES[name]
    code, out, err = run(argv)
    assert code == expected_code, err
    doc = portable(json.loads(out))
    path = GOLDEN / f"{name}.json"
    if REGEN:
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    golden = json.loads(path.read_text())
    assert close(doc, golden) is None, close(doc, golden)


@pytest.mark.parametrize("name", sorted(CASES))
def test_output_round_trips(name):
    code, out, _ = run(CASES[name][0])
    doc = json.loads(out)
    assert json.loads(dumps(doc)) == doc


SVG_CASES = {
    "render_sq2": "validate_sq2",
    "render_deg_plus": "validate_deg_plus",
    "render_homology_tri4": "homology_tri4",
    "render_sectors_tri4": "sectors_tri4",
}


@pytest.mark.parametrize("name", sorted(SVG_CASES))
def test_golden_svg(name, tmp_path):
    src = GOLDEN / f"{SVG_CASES[name]}.json"
    out = tmp_path / "out.svg"
    code, stdout, err = run(["render", str(src), "-o", str(out)])
    assert code == EXIT_OK, err
    assert json.loads(stdout)["bytes"] == len(out.read_bytes())
    path = GOLDEN / f"{name}.svg"
    if REGEN:
        path.write_bytes(out.read_bytes())
    assert out.read_bytes() == path.read_bytes()


def test_areas_closed_form():
    code, out, _ = run(["areas", "SQ2", "--target", "0.3,0.7"])
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["intercepts"]["4"] == pytest.approx(0.3, abs=1e-12)


def test_kasteleyn_verify_report():
    code, out, _ = run(["kasteleyn", "PIN5", "--verify", "--b0", "0"])
    (report,) = json.loads(out)["verify"]
    assert code == EXIT_OK
    assert report["relative_error"] < 1e-10
    assert report["abs_det"] == pytest.approx(report["matching_sum"], rel=1e-10)


def test_sectors_tri4_sheet(tmp_path):
    svg = tmp_path / "sheet.svg"
    code, out, _ = run(["sectors", "TRI4", "--areas", TRI4_AREAS, "--svg", str(svg)])
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["solved"] == doc["total"] == 16
    assert len(doc["sheet"]["panels"]) == 8
    assert svg.read_text().count("<g>") == 8


def test_figure_option_writes_png(tmp_path):
    png = tmp_path / "sq2.png"
    code, _, err = run(["render", str(GOLDEN / "validate_sq2.json"), "-o", str(tmp_path / "a.svg"),
                        "--figure", str(png)])
    assert code == EXIT_OK, err
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


@pytest.mark.parametrize(
    "argv",
    [[], ["frobnicate"], ["validate"], ["areas", "SQ2"], ["kasteleyn", "SQ2", "--bogus"],
     ["areas", "SQ2", "--target", "a,b"], ["kasteleyn", "SQ2", "--verify", "--b0", "9"],
     ["validate", "/nonexistent/tiling.json"], ["homology", "SQ2", "--sigma", "+x"]],
)
def test_usage_errors(argv):
    code, out, err = run(argv)
    assert code == EXIT_USAGE
    assert out == ""


def test_numerical_failure_exit_code():
    # cannot reach a negative tile area with positive orientations
    code, out, _ = run(["areas", "SQ2", "--target=-0.2,1.2"])
    assert code == EXIT_NUMERIC
    assert "error" in json.loads(out)


def test_non_tiling_document(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"region": [[0, 0], [1, 0], [1, 1]], "tiles": [[[0, 0], [1, 0], [0.4, 0.2]]]}))
    code, out, _ = run(["graph", str(bad)])
    assert code == EXIT_INVALID
    assert json.loads(out)["error"] == "InvalidTilingError"


def test_render_empty_document(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("{}")
    code, out, _ = run(["render", str(empty), "-o", str(tmp_path / "x.svg")])
    assert code == EXIT_INVALID
    assert json.loads(out)["error"] == "EmptyDocumentError"


def test_round_sig():
    assert round_sig(0.1 + 0.2) == 0.3
    assert round_sig({"a": [1 / 3, float("nan")], 2: (1 + 2j)}) == {"a": [0.333333333333333, None],
                                                                    "2": [1.0, 2.0]}
    assert str(round_sig(-0.0)) == "0.0"
