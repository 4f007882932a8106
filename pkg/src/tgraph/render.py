"""Deterministic SVG output for tilings, homology tilings and sector sheets.

The document is built by string formatting with fixed precision so that
identical input gives byte-identical output on every platform.

Accepted input (a dict, usually parsed from JSON):

* a single result: ``region`` and ``tiles`` (lists of [x, y]), optional
  ``orientations`` (+1/-1 per tile), ``homology`` (bool), ``issues``
  (validation issues with ``kind`` and ``location``) and ``title``;
* a sheet: ``panels`` (list of single results) and optional ``columns``.
"""
from __future__ import annotations

import numpy as np

from .errors import EmptyDocumentError

PALETTE = (
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3",
    "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
)
PANEL = 240.0
MARGIN = 12.0


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Frame:
    """Maps data coordinates into a square panel with y pointing up."""

    def __init__(self, points, x0=0.0, y0=0.0, size=PANEL):
        pts = np.asarray(points, dtype=float)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        span = float((hi - lo).max()) or 1.0
        self.scale = (size - 2 * MARGIN) / span
        self.lo, self.hi = lo, hi
        self.x0 = x0 + MARGIN + 0.5 * ((size - 2 * MARGIN) - self.scale * (hi[0] - lo[0]))
        self.y0 = y0 + MARGIN + 0.5 * ((size - 2 * MARGIN) - self.scale * (hi[1] - lo[1]))

    def __call__(self, p) -> str:
        x = self.x0 + self.scale * (p[0] - self.lo[0])
        y = self.y0 + self.scale * (self.hi[1] - p[1])
        return f"{_fmt(x)},{_fmt(y)}"

    def path(self, pts) -> str:
        return "M" + " L".join(self(p) for p in pts) + " Z"


def _defs() -> list[str]:
    return [
        "<defs>",
        '<pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6" '
        'patternTransform="rotate(45)">',
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#333333" stroke-width="1"/>',
        "</pattern>",
        "</defs>",
    ]


def _panel(result: dict, x0: float, y0: float) -> list[str]:
    region = result.get("region")
    tiles = result.get("tiles") or []
    if region is None and not tiles:
        raise EmptyDocumentError("nothing to draw: result has no region and no tiles")
    pts = [p for t in tiles for p in t] + (list(region) if region is not None else [])
    frame = _Frame(pts, x0, y0)
    orient = result.get("orientations") or [1] * len(tiles)
    homology = bool(result.get("homology"))
    rule = "evenodd" if homology else "nonzero"
    out = ["<g>"]
    if result.get("title"):
        out.append(f'<text x="{_fmt(x0 + MARGIN)}" y="{_fmt(y0 + MARGIN - 2)}" font-size="10" '
                   f'font-family="sans-serif">{_escape(str(result["title"]))}</text>')
    for w, tile in enumerate(tiles):
        color = PALETTE[w % len(PALETTE)]
        opacity = ' fill-opacity="0.6"' if homology else ""
        out.append(f'<path d="{frame.path(tile)}" fill="{color}"{opacity} fill-rule="{rule}" '
                   f'stroke="#000000" stroke-width="0.8" data-white="{w}"/>')
        if orient[w] < 0:
            out.append(f'<path d="{frame.path(tile)}" fill="url(#hatch)" fill-rule="{rule}" '
                       f'stroke="none" data-white="{w}"/>')
    if region is not None:
        out.append(f'<path d="{frame.path(region)}" fill="none" stroke="#1f4fd8" stroke-width="2"/>')
    for issue in result.get("issues") or []:
        loc = issue.get("location")
        if loc is not None and issue.get("kind") in ("degenerate-vertex", "degenerate-corner"):
            cx, cy = frame(loc).split(",")
            out.append(f'<circle cx="{cx}" cy="{cy}" r="5" fill="none" stroke="#d62728" stroke-width="1.5"/>')
    out.append("</g>")
    return out


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(result: dict, columns: int | None = None) -> str:
    """SVG 1.1 document for a single result or a sheet of panels."""
    panels = result.get("panels")
    if panels is not None:
        if not panels:
            raise EmptyDocumentError("sheet has no panels")
        cols = columns or int(result.get("columns", 4))
        rows = -(-len(panels) // cols)
        width, height = cols * PANEL, rows * PANEL
        body = []
        for k, panel in enumerate(panels):
            body += _panel(panel, (k % cols) * PANEL, (k // cols) * PANEL)
    else:
        width = height = PANEL
        body = _panel(result, 0.0, 0.0)
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect x="0" y="0" width="{_fmt(width)}" height="{_fmt(height)}" fill="#ffffff"/>',
    ]
    return "\n".join(head + _defs() + body + ["</svg>"]) + "\n"


def sector_sheet(sweep, on_region: str = "R") -> dict:
    """Sheet document with one panel per sector solved on ``on_region``;
    the remaining solutions are their point reflections."""
    panels = []
    for rep in sweep.reports:
        if rep.status == "solved" and rep.region == on_region:
            doc = rep.solution.to_json()
            doc["title"] = "".join("+" if s > 0 else "-" for s in rep.sigma)
            panels.append(doc)
    return {"panels": panels, "columns": 4}
