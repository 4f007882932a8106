"""Desk-scale fixture tilings and graphs.

SQ2      unit square cut by the line y = cut (default 0.4)
SQ3      unit square, full-height cut x = 0.5, right half cut at y = 0.5
PIN5     3x3 pinwheel of four rectangles around a unit centre square
TRI4     triangle with a pinwheel of three segments around a central
         triangle; no two interior segments are parallel, all faces quads
HEX4     unit square with a two-legged T (one hexagonal face)
DEG-PLUS unit square cut into four quadrants (degenerate "+" vertex)
GADGET   bipartite graph containing a three-white gadget that makes it
         2-degenerate
"""
from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np

from .tiling import Black, TGraph, Tiling

UNIT_SQUARE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]


def rect(x0, y0, x1, y1):
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]


def sq2(cut: float = 0.4) -> Tiling:
    return Tiling(UNIT_SQUARE, [rect(0, 0, 1, cut), rect(0, cut, 1, 1)])


def sq3() -> Tiling:
    return Tiling(UNIT_SQUARE, [rect(0, 0, 0.5, 1), rect(0.5, 0, 1, 0.5), rect(0.5, 0.5, 1, 1)])


def pin5() -> Tiling:
    return Tiling(
        rect(0, 0, 3, 3),
        [rect(0, 0, 2, 1), rect(2, 0, 3, 2), rect(1, 2, 3, 3), rect(0, 1, 1, 3), rect(1, 1, 2, 2)],
    )


def hex4() -> Tiling:
    """Unit square cut at y = 0.5 with two legs meeting the cut at one point
    from below: the graph has a hexagonal face."""
    return Tiling(
        UNIT_SQUARE,
        [
            [(0, 0), (0.2, 0), (0.5, 0.5), (0, 0.5)],
            [(0.2, 0), (0.8, 0), (0.5, 0.5)],
            [(0.8, 0), (1, 0), (1, 0.5), (0.5, 0.5)],
            rect(0, 0.5, 1, 1),
        ],
    )


def deg_plus() -> Tiling:
    return Tiling(
        UNIT_SQUARE,
        [rect(0, 0, 0.5, 0.5), rect(0.5, 0, 1, 0.5), rect(0.5, 0.5, 1, 1), rect(0, 0.5, 0.5, 1)],
    )


TRI4_REGION = [(0.0, 0.0), (1.0, 0.0), (0.4, 0.9)]
TRI4_RADIUS = 0.14
TRI4_ANGLES_DEG = (10.0, 130.0, 250.0)


def _ray_exit(region, origin, direction):
    """First point where the ray leaves the convex region."""
    best = math.inf
    pts = np.asarray(region, dtype=float)
    for a, b in zip(pts, np.roll(pts, -1, axis=0)):
        e = b - a
        m = np.column_stack([direction, -e])
        if abs(np.linalg.det(m)) < 1e-14:
            continue
        s, u = np.linalg.solve(m, a - origin)
        if s > 1e-12 and -1e-12 <= u <= 1 + 1e-12:
            best = min(best, s)
    return origin + best * direction


def construct_tri4(region=TRI4_REGION, radius=TRI4_RADIUS, angles_deg=TRI4_ANGLES_DEG) -> Tiling:
    """Pinwheel tiling of a triangle.

    A small central triangle P0 P1 P2 is placed at the region's centroid.
    Segment k runs from P_k through P_{k+1} to the region boundary, so P_k
    is a T on segment k-1. The outer tile k is the wedge at P_{k+1} between
    the continuation of segment k and segment k+1."""
    reg = np.asarray(region, dtype=float)
    c = reg.mean(axis=0)
    p = [c + radius * np.array([math.cos(math.radians(a)), math.sin(math.radians(a))]) for a in angles_deg]
    exits = []
    for k in range(3):
        d = p[(k + 1) % 3] - p[k]
        exits.append(_ray_exit(reg, p[(k + 1) % 3], d / np.linalg.norm(d)))
    tiles = [np.array(p)]
    for k in range(3):
        apex = p[(k + 1) % 3]
        d1 = exits[k] - apex
        d2 = exits[(k + 1) % 3] - apex
        pts = [apex, exits[k], exits[(k + 1) % 3]]
        span = math.atan2(d1[0] * d2[1] - d1[1] * d2[0], d1 @ d2)
        for corner in reg:
            v = corner - apex
            a1 = math.atan2(d1[0] * v[1] - d1[1] * v[0], d1 @ v)
            a2 = math.atan2(v[0] * d2[1] - v[1] * d2[0], v @ d2)
            if (span > 0 and a1 > 0 and a2 > 0) or (span < 0 and a1 < 0 and a2 < 0):
                pts.append(corner)
        arr = np.array(pts)
        mid = arr.mean(axis=0)
        order = np.argsort(np.arctan2(arr[:, 1] - mid[1], arr[:, 0] - mid[0]))
        tiles.append(arr[order])
    return Tiling(reg, tiles)


def tri4() -> Tiling:
    """The frozen TRI4 fixture (see :func:`construct_tri4`)."""
    return Tiling.from_json(load_data("tri4.json"))


def load_data(name: str) -> dict:
    return json.loads(resources.files("tgraph").joinpath("data").joinpath(name).read_text())


def gadget_2deg() -> TGraph:
    """Two outer whites u0, u1 (0-1) and three gadget whites g0..g2 (2-4)
    hanging on corner blacks c0..c2 (4-6) around a centre black (7); blacks
    0-3 are boundary segments. No cover contains both (u0, c0) and (u1, c1)."""
    adj = {
        0: [0, 1, 4],
        1: [2, 3, 5, 6],
        2: [7, 4, 5],
        3: [7, 5, 6],
        4: [7, 6, 4],
    }
    return combinatorial_graph(5, 8, adj, boundary=[0, 1, 2, 3])


def degree_two_graph() -> TGraph:
    """SQ3's graph with tile 0 attached to only two segments."""
    adj = {0: [0, 4], 1: [0, 1, 5, 4], 2: [5, 1, 2, 4]}
    return combinatorial_graph(3, 6, adj, boundary=[0, 1, 2, 3])


def combinatorial_graph(n_whites, n_blacks, adj, boundary) -> TGraph:
    members = {b: [] for b in range(n_blacks)}
    for w in sorted(adj):
        for b in adj[w]:
            members[b].append(w)
    blacks = []
    for b in range(n_blacks):
        bnd = boundary.index(b) if b in boundary else None
        blacks.append(Black(tuple(members[b]), (), bnd))
    weights = {(w, b): 1.0 + 0j for w in adj for b in adj[w]}
    return TGraph(n_whites, blacks, weights, [list(adj[w]) for w in range(n_whites)], [], list(boundary))


FIXTURES = {
    "SQ2": sq2,
    "SQ3": sq3,
    "PIN5": pin5,
    "TRI4": tri4,
    "HEX4": hex4,
    "DEG-PLUS": deg_plus,
}

VALID_FIXTURES = ("SQ2", "SQ3", "PIN5", "TRI4", "HEX4")


def get_fixture(name: str) -> Tiling:
    try:
        return FIXTURES[name.upper()]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
