"""Command-line interface.

Every subcommand prints one JSON document on stdout. Tiling arguments are
file paths or fixture names (SQ2, SQ3, PIN5, TRI4, HEX4, DEG-PLUS).

Exit codes: 0 success, 2 validation failure, 3 numerical failure,
64 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import errors
from .areamap import InterceptModel, psi_inverse
from .dimer import kasteleyn_from_tiling, sign_report, verify_kasteleyn
from .fixtures import FIXTURES, get_fixture
from .homology import enumerate_sectors, parse_sigma, solve_homology
from .render import render_svg, sector_sheet
from .solvers import prescribe_shapes, reconstruct_from_graph
from .tiling import TGraph, Tiling, build_graph, validate

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def round_sig(obj, digits: int = 15):
    """Round every float in a JSON-like structure to ``digits`` significant digits."""
    if isinstance(obj, (complex, np.complexfloating)):
        return [round_sig(float(obj.real), digits), round_sig(float(obj.imag), digits)]
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(f"{obj:.{digits}g}") + 0.0
    if isinstance(obj, (np.floating,)):
        return round_sig(float(obj), digits)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return round_sig(obj.tolist(), digits)
    if isinstance(obj, dict):
        return {str(k): round_sig(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v, digits) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    return obj


def dumps(doc) -> str:
    return json.dumps(round_sig(doc), indent=1, sort_keys=True)


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def load_tiling(arg: str) -> Tiling:
    if arg.upper() in FIXTURES and not Path(arg).exists():
        return get_fixture(arg)
    doc = _read_json(arg)
    if "tiling" in doc:
        doc = doc["tiling"]
    try:
        return Tiling.from_json(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{arg} is not a tiling document: {exc}") from None


def _floats(text: str | None) -> np.ndarray | None:
    if text is None:
        return None
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _tiling_doc(t: Tiling) -> dict:
    return t.to_json()


def cmd_validate(args) -> tuple[dict, int]:
    t = load_tiling(args.tiling)
    report = validate(t)
    doc = report.to_json()
    doc.update(_tiling_doc(t))
    return doc, EXIT_OK if report.ok else EXIT_INVALID


def cmd_graph(args):
    g = build_graph(load_tiling(args.tiling))
    return g.to_json(), EXIT_OK


def _b0_label(g: TGraph, k: int) -> int:
    if not 0 <= k < len(g.boundary):
        raise UsageError(f"--b0 must be a region edge index in [0, {len(g.boundary)})")
    return g.boundary[k]


def cmd_kasteleyn(args):
    t = load_tiling(args.tiling)
    g = build_graph(t)
    k = kasteleyn_from_tiling(g)
    doc = {
        "matrix": [[[z.real, z.imag] for z in row] for row in k.entries],
        "faces": sign_report(k.entries, g),
    }
    code = EXIT_OK
    if args.verify:
        b0s = [_b0_label(g, args.b0)] if args.b0 is not None else list(g.boundary)
        reports = [verify_kasteleyn(k, g, b0) for b0 in b0s]
        doc["verify"] = reports
        if any(r["relative_error"] > 1e-10 for r in reports):
            code = EXIT_NUMERIC
    return doc, code


def cmd_shapes(args):
    t = load_tiling(args.tiling)
    doc = _read_json(args.shapes)
    shapes = doc["shapes"] if isinstance(doc, dict) else doc
    res = prescribe_shapes(t, [np.asarray(s, dtype=float) for s in shapes])
    out = {
        "scales": res.scales,
        "degenerate": res.degenerate,
        "closure_residual": res.closure_residual,
        "self_intersecting": res.self_intersecting,
        "tiling": {"region": res.tiling.region.tolist(), "tiles": [p.tolist() for p in res.tiling.tiles]},
    }
    if not (res.degenerate or res.self_intersecting):
        report = validate(res.tiling)
        out["valid"] = report.ok
        return out, EXIT_OK if report.ok else EXIT_INVALID
    return out, EXIT_OK


def cmd_reconstruct(args):
    gdoc = _read_json(args.graph)
    try:
        g = TGraph.from_json(gdoc)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.graph} is not a graph document: {exc}") from None
    rdoc = _read_json(args.region)
    region = rdoc["region"] if isinstance(rdoc, dict) else rdoc
    rec = reconstruct_from_graph(g, region=np.asarray(region, dtype=float))
    return {"tiling": _tiling_doc(rec.tiling), "valid": True}, EXIT_OK


def cmd_areas(args):
    t = load_tiling(args.tiling)
    g = build_graph(t)
    b0 = _b0_label(g, args.b0)
    model = InterceptModel(t, b0=b0, graph=g)
    target = _floats(args.target)
    sigma = parse_sigma(args.sigma) if args.sigma else None
    res = psi_inverse(model, target, sigma=sigma)
    return {
        "intercepts": res.intercepts,
        "b0": b0,
        "areas": model.psi(res.x),
        "iterations": res.iterations,
        "residual": res.residual,
        "tiling": _tiling_doc(model.tiling(res.x)),
    }, EXIT_OK


def _areas_or_reference(t: Tiling, text):
    areas = _floats(text)
    return t.tile_areas() if areas is None else areas


def cmd_homology(args):
    t = load_tiling(args.tiling)
    sigma = parse_sigma(args.sigma) if args.sigma else None
    sol = solve_homology(t, _areas_or_reference(t, args.areas), sigma)
    doc = sol.to_json()
    doc.update(criticality=sol.criticality, area_error=sol.area_error, winding_ok=sol.winding_ok,
               iterations=sol.iterations)
    return doc, EXIT_OK


def cmd_sectors(args):
    t = load_tiling(args.tiling)
    sweep = enumerate_sectors(t, _areas_or_reference(t, args.areas))
    sheet = sector_sheet(sweep)
    if args.svg:
        Path(args.svg).write_text(render_svg(sheet))
    if args.figure:
        from .plotting import save_png
        save_png(sheet, args.figure)
    return {
        "sectors": [r.to_json() for r in sweep.reports],
        "solved": len(sweep.solved),
        "total": len(sweep.reports),
        "pairs_consistent": sweep.pairs_consistent,
        "sheet": sheet,
    }, EXIT_OK


def _renderable(doc: dict) -> dict:
    if "panels" in doc or "region" in doc:
        return doc
    for key in ("sheet", "tiling"):
        if key in doc:
            return doc[key]
    return doc


def cmd_render(args):
    doc = _read_json(args.result)
    svg = render_svg(_renderable(doc))
    Path(args.output).write_text(svg)
    if args.figure:
        from .plotting import save_png
        save_png(_renderable(doc), args.figure)
    return {"written": args.output, "bytes": len(svg.encode())}, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tgraph", description="Convex tilings, t-graphs and the dimer model.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="check a tiling and report defects")
    s.add_argument("tiling")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("graph", help="bipartite graph of a tiling")
    s.add_argument("tiling")
    s.set_defaults(func=cmd_graph)

    s = sub.add_parser("kasteleyn", help="edge-vector Kasteleyn matrix")
    s.add_argument("tiling")
    s.add_argument("--verify", action="store_true", help="compare |det K0| with enumeration")
    s.add_argument("--b0", type=int, default=None, help="region edge index of the kept boundary segment")
    s.set_defaults(func=cmd_kasteleyn)

    s = sub.add_parser("shapes", help="tiling with prescribed tile shapes")
    s.add_argument("tiling")
    s.add_argument("shapes")
    s.set_defaults(func=cmd_shapes)

    s = sub.add_parser("reconstruct", help="tiling from a graph and a region")
    s.add_argument("graph")
    s.add_argument("region")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("areas", help="intercepts realising given tile areas")
    s.add_argument("tiling")
    s.add_argument("--target", required=True, help="comma-separated areas, one per tile")
    s.add_argument("--b0", type=int, default=0, help="region edge index of the free boundary segment")
    s.add_argument("--sigma", default=None, help="orientation string such as ++-+")
    s.set_defaults(func=cmd_areas)

    s = sub.add_parser("homology", help="homology tiling with given areas and orientations")
    s.add_argument("tiling")
    s.add_argument("--areas", default=None)
    s.add_argument("--sigma", default=None)
    s.set_defaults(func=cmd_homology)

    s = sub.add_parser("sectors", help="solve every orientation sector")
    s.add_argument("tiling")
    s.add_argument("--areas", default=None)
    s.add_argument("--svg", default=None, help="write the sheet of solutions on R")
    s.add_argument("--figure", default=None, help="write the sheet as a PNG")
    s.set_defaults(func=cmd_sectors)

    s = sub.add_parser("render", help="SVG of a result document")
    s.add_argument("result")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--figure", default=None, help="also write a PNG")
    s.set_defaults(func=cmd_render)
    return p


VALIDATION_ERRORS = (
    errors.InvalidTilingError,
    errors.NotATilingError,
    errors.UnsupportedStructureError,
    errors.EmptyDocumentError,
)
USAGE_ERRORS = (UsageError, errors.InvalidInputError, KeyError)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        doc, code = args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except VALIDATION_ERRORS as exc:
        doc = {"error": type(exc).__name__, "message": str(exc)}
        report = getattr(exc, "report", None)
        if report is not None:
            doc["issues"] = report.to_json()["issues"]
        print(dumps(doc), file=stdout)
        return EXIT_INVALID
    except USAGE_ERRORS as exc:
        print(str(exc).strip("'\""), file=stderr)
        return EXIT_USAGE
    except errors.TGraphError as exc:
        print(dumps({"error": type(exc).__name__, "message": str(exc)}), file=stdout)
        return EXIT_NUMERIC
    print(dumps(doc), file=stdout)
    return code


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
