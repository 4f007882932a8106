"""Tiling data model: validation, the bipartite t-graph, intercepts,
orientations and combinatorial equivalence."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .config import geom_tol
from .errors import DegenerateTileError, InvalidTilingError
from .geom import (
    AreaForm,
    Direction,
    Line,
    TileShape,
    area_form,
    convex_overlap_depth,
    cross,
    edge_vectors,
    is_convex,
    normalize_polygon,
    point_in_convex,
    same_cone,
    signed_area,
)

LINE_TOL = 1e-7


@dataclass
class Tiling:
    """A polygonal region and its convex tiles (counterclockwise vertices)."""

    region: np.ndarray
    tiles: list

    def __post_init__(self):
        self.region = normalize_polygon(self.region)
        self.tiles = [normalize_polygon(t) for t in self.tiles]

    @classmethod
    def from_json(cls, doc: dict) -> "Tiling":
        return cls(np.array(doc["region"], dtype=float), [np.array(t, dtype=float) for t in doc["tiles"]])

    def to_json(self) -> dict:
        return {
            "region": self.region.tolist(),
            "tiles": [t.tolist() for t in self.tiles],
        }

    @property
    def n_tiles(self) -> int:
        return len(self.tiles)

    def area(self) -> float:
        return signed_area(self.region)

    def tile_areas(self) -> np.ndarray:
        return np.array([signed_area(t) for t in self.tiles])

    def translated(self, v) -> "Tiling":
        v = np.asarray(v, dtype=float)
        return Tiling(self.region + v, [t + v for t in self.tiles])

    def transformed(self, matrix, offset=(0.0, 0.0)) -> "Tiling":
        m = np.asarray(matrix, dtype=float)
        off = np.asarray(offset, dtype=float)
        return Tiling(self.region @ m.T + off, [t @ m.T + off for t in self.tiles])

    def scaled(self, s: float) -> "Tiling":
        return self.transformed(np.eye(2) * s)

    def vertices(self) -> np.ndarray:
        return np.vstack(self.tiles)


@dataclass(frozen=True)
class Issue:
    kind: str
    message: str
    location: tuple | None = None
    tiles: tuple = ()


@dataclass
class ValidationReport:
    issues: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __len__(self) -> int:
        return len(self.issues)

    def add(self, kind, message, location=None, tiles=()):
        loc = None if location is None else tuple(float(c) for c in location)
        self.issues.append(Issue(kind, message, loc, tuple(int(t) for t in tiles)))

    def kinds(self) -> list[str]:
        return [i.kind for i in self.issues]

    def of_kind(self, kind: str) -> list[Issue]:
        return [i for i in self.issues if i.kind == kind]

    def summary(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(i.message for i in self.issues)

    def to_json(self) -> dict:
        return {
            "valid": self.ok,
            "issues": [
                {"kind": i.kind, "message": i.message, "location": list(i.location) if i.location else None,
                 "tiles": list(i.tiles)}
                for i in self.issues
            ],
        }


def _pt(p) -> str:
    return f"({float(p[0]):.12g}, {float(p[1]):.12g})"


def _cluster_points(points, tol):
    reps: list[np.ndarray] = []
    members: list[list[int]] = []
    for idx, p in enumerate(points):
        for k, r in enumerate(reps):
            if np.linalg.norm(p - r) <= tol:
                members[k].append(idx)
                break
        else:
            reps.append(p)
            members.append([idx])
    return reps, members


def _on_segment_interior(p, a, b, tol) -> bool:
    ab = b - a
    length = np.linalg.norm(ab)
    if length <= tol:
        return False
    if abs(cross(ab, p - a)) / length > tol:
        return False
    s = (p - a) @ ab / length
    return tol < s < length - tol


def validate(t: Tiling, tol: float | None = None) -> ValidationReport:
    """Check convexity, covering and nondegeneracy; never raises."""
    tol = geom_tol() if tol is None else tol
    report = ValidationReport()
    region = t.region
    if len(region) < 3 or signed_area(region) <= tol:
        report.add("bad-region", "region has no positive area")
        return report
    region_convex = is_convex(region, tol)
    if not region_convex:
        report.add("nonconvex-region", "region is not convex")
    good = []
    for w, tile in enumerate(t.tiles):
        if len(tile) < 3 or not is_convex(tile, tol):
            report.add("nonconvex-tile", f"tile {w} is not a convex polygon", tiles=(w,))
            continue
        good.append(w)
        if region_convex:
            for p in tile:
                if not point_in_convex(region, p, 10 * tol):
                    report.add("outside-region", f"tile {w} has a vertex outside the region", p, (w,))
                    break
    for i, w1 in enumerate(good):
        for w2 in good[i + 1:]:
            if convex_overlap_depth(t.tiles[w1], t.tiles[w2]) > 10 * tol:
                report.add("overlap", f"tiles {w1} and {w2} overlap", tiles=(w1, w2))
    area_r = signed_area(region)
    defect = area_r - sum(signed_area(x) for x in t.tiles if len(x) >= 3)
    if abs(defect) > tol * max(area_r, 1.0) * 10:
        report.add("gap", f"tile areas miss the region area by {defect:.3g}")
    if not report.ok:
        return report

    corners = list(region)
    pts = [p for tile in t.tiles for p in tile]
    reps, _ = _cluster_points(pts, 10 * tol)
    for p in reps:
        at_corner = any(np.linalg.norm(p - c) <= 10 * tol for c in corners)
        incident = [w for w, tile in enumerate(t.tiles) if any(np.linalg.norm(p - v) <= 10 * tol for v in tile)]
        if at_corner:
            if len(incident) > 1:
                report.add("degenerate-corner", f"{len(incident)} tiles meet at region corner {_pt(p)}",
                           p, incident)
            continue
        on_boundary = any(
            _on_segment_interior(p, a, b, 10 * tol) for a, b in zip(region, np.roll(region, -1, axis=0))
        )
        if on_boundary:
            continue
        through = any(
            _on_segment_interior(p, a, b, 10 * tol)
            for tile in t.tiles
            for a, b in zip(tile, np.roll(tile, -1, axis=0))
        )
        if not through:
            report.add("degenerate-vertex", f"every tile meets at a corner at {_pt(p)}",
                       p, incident)
    return report


@dataclass(frozen=True)
class Black:
    """A maximal segment.

    ``left`` holds tiles whose counterclockwise edge runs along ``forward``
    (so they lie to its left), ``right`` those whose edge runs against it;
    both are ordered along ``forward``."""

    left: tuple
    right: tuple
    boundary: int | None = None
    line: Line | None = None
    start: np.ndarray | None = None
    end: np.ndarray | None = None
    forward: np.ndarray | None = None

    @property
    def is_boundary(self) -> bool:
        return self.boundary is not None

    @property
    def tiles(self) -> tuple:
        return self.left + self.right

    def rotation(self) -> list[int]:
        return list(reversed(self.left)) + list(self.right)


@dataclass
class TGraph:
    """Bipartite graph of a tiling: whites are tiles, blacks are maximal
    segments, weights are counterclockwise tile-edge vectors."""

    n_whites: int
    blacks: list
    weights: dict
    rotation: list
    faces: list
    boundary: list
    region: np.ndarray | None = None

    @property
    def n_blacks(self) -> int:
        return len(self.blacks)

    @property
    def interior_blacks(self) -> list[int]:
        return [b for b, blk in enumerate(self.blacks) if not blk.is_boundary]

    @property
    def boundary_blacks(self) -> list[int]:
        return list(self.boundary)

    @property
    def n_region_edges(self) -> int:
        return len(self.boundary)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.weights)

    def neighbors_white(self, w: int) -> list[int]:
        return list(self.rotation[w])

    def neighbors_black(self, b: int) -> list[int]:
        return list(self.blacks[b].tiles)

    def face_lengths(self) -> list[int]:
        return [len(f) for f in self.faces]

    def all_quads(self) -> bool:
        return all(len(f) == 4 for f in self.faces)

    def kasteleyn(self) -> np.ndarray:
        k = np.zeros((self.n_whites, self.n_blacks), dtype=complex)
        for (w, b), z in self.weights.items():
            k[w, b] = z
        return k

    def with_weights(self, weights: dict) -> "TGraph":
        return TGraph(self.n_whites, self.blacks, dict(weights), self.rotation, self.faces, self.boundary, self.region)

    def euler_ok(self) -> bool:
        return self.n_blacks == self.n_whites + self.n_region_edges - 1

    def to_json(self) -> dict:
        blacks = []
        for blk in self.blacks:
            d = {"boundary": blk.boundary, "left": list(blk.left), "right": list(blk.right)}
            if blk.line is not None:
                d.update(
                    theta=blk.line.direction.theta,
                    intercept=blk.line.intercept,
                    start=blk.start.tolist(),
                    end=blk.end.tolist(),
                    forward=blk.forward.tolist(),
                )
            blacks.append(d)
        doc = {
            "whites": self.n_whites,
            "blacks": blacks,
            "edges": [[w, b, z.real, z.imag] for (w, b), z in sorted(self.weights.items())],
            "rotation": [list(r) for r in self.rotation],
            "faces": [list(f) for f in self.faces],
            "boundary": list(self.boundary),
            "counts": {
                "W": self.n_whites,
                "B": self.n_blacks,
                "B_int": len(self.interior_blacks),
                "n": self.n_region_edges,
                "euler_ok": self.euler_ok(),
            },
        }
        if self.region is not None:
            doc["region"] = self.region.tolist()
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "TGraph":
        blacks = []
        for d in doc["blacks"]:
            line = start = end = forward = None
            if "theta" in d:
                line = Line(Direction(d["theta"]), d["intercept"])
                start, end = np.array(d["start"], dtype=float), np.array(d["end"], dtype=float)
                forward = np.array(d["forward"], dtype=float)
            blacks.append(
                Black(tuple(d["left"]), tuple(d.get("right", ())), d.get("boundary"), line, start, end, forward)
            )
        weights = {(int(w), int(b)): complex(re, im) for w, b, re, im in doc["edges"]}
        region = np.array(doc["region"], dtype=float) if "region" in doc else None
        return cls(
            int(doc["whites"]),
            blacks,
            weights,
            [list(r) for r in doc["rotation"]],
            [list(f) for f in doc.get("faces", [])],
            list(doc["boundary"]),
            region,
        )


def _tile_edges(t: Tiling):
    out = []
    for w, tile in enumerate(t.tiles):
        for k, (p, q) in enumerate(zip(tile, np.roll(tile, -1, axis=0))):
            out.append((w, k, p, q))
    return out


def _same_line(l1: Line, l2: Line, tol: float) -> bool:
    d = abs(l1.direction.theta - l2.direction.theta)
    if d < tol:
        return abs(l1.intercept - l2.intercept) < tol
    if abs(d - math.pi) < tol:
        return abs(l1.intercept + l2.intercept) < tol
    return False


def build_graph(t: Tiling, tol: float | None = None) -> TGraph:
    """Extract the bipartite graph with boundary identification."""
    tol = geom_tol() if tol is None else tol
    report = validate(t, tol)
    if not report.ok:
        raise InvalidTilingError(report)

    region = t.region
    n = len(region)
    region_lines = [Line.through(a, b) for a, b in zip(region, np.roll(region, -1, axis=0))]

    # group tile edges by supporting line
    clusters: list[tuple[Line, list]] = []
    for w, k, p, q in _tile_edges(t):
        line = Line.through(p, q)
        for rep, members in clusters:
            if _same_line(rep, line, LINE_TOL):
                members.append((w, k, p, q))
                break
        else:
            clusters.append((line, [(w, k, p, q)]))

    raw_blacks = []
    for line, members in clusters:
        boundary_idx = next((i for i, rl in enumerate(region_lines) if _same_line(rl, line, LINE_TOL)), None)
        if boundary_idx is not None:
            a, b = region[boundary_idx], region[(boundary_idx + 1) % n]
            f = (b - a) / np.linalg.norm(b - a)
        else:
            f = line.direction.unit
        items = []
        for w, k, p, q in members:
            s0, s1 = p @ f, q @ f
            items.append((min(s0, s1), max(s0, s1), w, k, s1 > s0))
        items.sort(key=lambda it: it[0])
        groups = []
        for it in items:
            if groups and it[0] <= groups[-1]["hi"] + 10 * tol:
                groups[-1]["items"].append(it)
                groups[-1]["hi"] = max(groups[-1]["hi"], it[1])
            else:
                groups.append({"lo": it[0], "hi": it[1], "items": [it]})
        if boundary_idx is not None and len(groups) != 1:
            raise InvalidTilingError(report, f"region edge {boundary_idx} is not covered by one segment")
        for g in groups:
            left = tuple(it[2] for it in g["items"] if it[4])
            right = tuple(it[2] for it in g["items"] if not it[4])
            offset = line.intercept * line.direction.normal
            base = offset - (offset @ f) * f
            raw_blacks.append(
                {
                    "line": line,
                    "f": f,
                    "start": base + g["lo"] * f,
                    "end": base + g["hi"] * f,
                    "left": left,
                    "right": right,
                    "boundary": boundary_idx,
                    "edges": {it[2]: it[3] for it in g["items"]},
                }
            )

    boundary_blacks = sorted((rb for rb in raw_blacks if rb["boundary"] is not None), key=lambda rb: rb["boundary"])
    interior = sorted(
        (rb for rb in raw_blacks if rb["boundary"] is None),
        key=lambda rb: (round(rb["line"].direction.theta, 7), round(rb["line"].intercept, 7),
                        round(float(rb["start"] @ rb["f"]), 7)),
    )
    ordered = boundary_blacks + interior
    if len(boundary_blacks) != n:
        raise InvalidTilingError(report, "region edges and boundary segments do not correspond")

    blacks = []
    edge_to_black = {}
    for b, rb in enumerate(ordered):
        blacks.append(
            Black(rb["left"], rb["right"], rb["boundary"], rb["line"], rb["start"], rb["end"], rb["f"])
        )
        for w, k in rb["edges"].items():
            edge_to_black[(w, k)] = b

    rotation = []
    weights = {}
    for w, tile in enumerate(t.tiles):
        evs = edge_vectors(tile)
        rot = []
        for k, e in enumerate(evs):
            b = edge_to_black[(w, k)]
            rot.append(b)
            weights[(w, b)] = complex(e[0], e[1])
        rotation.append(rot)

    faces = _faces(t, blacks, rotation, tol)
    g = TGraph(len(t.tiles), blacks, weights, rotation, faces, [b for b in range(n)], region.copy())
    n_edges = len(weights)
    expected = n_edges - (g.n_whites + g.n_blacks) + 1
    if len(faces) != expected:
        raise InvalidTilingError(report, f"found {len(faces)} bounded faces, expected {expected}")
    return g


def _faces(t: Tiling, blacks, rotation, tol) -> list[list[int]]:
    groups: dict = {}
    for s, blk in enumerate(blacks):
        if blk.is_boundary:
            continue
        for p, q in ((blk.start, blk.end), (blk.end, blk.start)):
            host = None
            for b, other in enumerate(blacks):
                if b != s and _on_segment_interior(p, other.start, other.end, 10 * tol):
                    host = b
                    break
            if host is None:
                raise InvalidTilingError(ValidationReport(), f"segment {s} does not end at a T")
            fb = blacks[host].forward
            side = 1 if cross(fb, q - p) > 0 else -1
            key = (host, round(float(p @ fb), 7), side)
            groups.setdefault(key, {"p": p, "legs": []})["legs"].append((s, (q - p) / np.linalg.norm(q - p)))

    faces = []
    for (host, _, side), data in sorted(groups.items(), key=lambda kv: kv[0]):
        p = data["p"]
        fb = blacks[host].forward

        def angle(d):
            return math.atan2(side * cross(fb, d), fb @ d)

        legs = sorted(data["legs"], key=lambda sd: angle(sd[1]))
        ray_angles = [0.0] + [angle(d) for _, d in legs] + [math.pi]
        tiles_at = {}
        for w, tile in enumerate(t.tiles):
            if any(np.linalg.norm(v - p) <= 10 * tol for v in tile):
                c = tile.mean(axis=0) - p
                if side * cross(fb, c) <= 0:
                    continue
                a = angle(c)
                for k in range(len(ray_angles) - 1):
                    if ray_angles[k] < a < ray_angles[k + 1]:
                        tiles_at[k] = w
        if len(tiles_at) != len(legs) + 1:
            raise InvalidTilingError(ValidationReport(), f"could not resolve the face at {_pt(p)}")
        cycle = [tiles_at[0]]
        for k, (s, _) in enumerate(legs):
            cycle += [s, tiles_at[k + 1]]
        cycle.append(host)
        if side < 0:
            # legs were swept clockwise; keep every face counterclockwise
            cycle = cycle[-2::-1] + [host]
        faces.append(cycle)
    return faces


def face_pairs(face: list[int]) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Split an alternating face ``w1 b1 w2 b2 ...`` into (numerator,
    denominator) edge pairs: (w_k, b_k) over (w_{k+1}, b_k)."""
    ws, bs = face[0::2], face[1::2]
    ell = len(ws)
    return [((ws[k], bs[k]), (ws[(k + 1) % ell], bs[k])) for k in range(ell)]


def _canonical_code(g: TGraph):
    # darts: white side uses rotation lists, black side uses Black.rotation()
    rot_w = [list(r) for r in g.rotation]
    rot_b = [blk.rotation() for blk in g.blacks]
    root = g.boundary[0]
    label = {("b", root): 0}
    entry = {("b", root): rot_b[root][0] if rot_b[root] else None}
    order = [("b", root)]
    queue = deque([("b", root)])
    code = []
    while queue:
        v = queue.popleft()
        color, idx = v
        rot = rot_w[idx] if color == "w" else rot_b[idx]
        first = entry[v]
        if first is None:
            nbrs = []
        else:
            start = rot.index(first)
            nbrs = rot[start:] + rot[:start]
        other = "b" if color == "w" else "w"
        row = []
        for u in nbrs:
            key = (other, u)
            if key not in label:
                label[key] = len(label)
                order.append(key)
                queue.append(key)
                entry[key] = idx
            row.append(label[key])
        bnd = g.blacks[idx].boundary if color == "b" else None
        code.append((color, -1 if bnd is None else bnd, tuple(row)))
    if len(label) != g.n_whites + g.n_blacks:
        return None
    return tuple(code)


def combinatorially_equivalent(g1: TGraph, g2: TGraph) -> bool:
    """Graph isomorphism preserving colours, planar embedding and the
    boundary identification, decided by canonical traversal from the
    boundary segment of region edge 0."""
    if (g1.n_whites, g1.n_blacks, g1.n_region_edges) != (g2.n_whites, g2.n_blacks, g2.n_region_edges):
        return False
    c1, c2 = _canonical_code(g1), _canonical_code(g2)
    return c1 is not None and c1 == c2


def intercepts(t: Tiling, free_boundary: int | None = None, graph: TGraph | None = None) -> dict[int, float]:
    """Signed intercepts of the interior segments (and of ``free_boundary``)."""
    g = build_graph(t) if graph is None else graph
    labels = g.interior_blacks + ([free_boundary] if free_boundary is not None else [])
    return {b: g.blacks[b].line.intercept for b in labels}


def _match_directions(tile, ref):
    """Reference unit directions aligned with ``tile``'s edges and the
    reference edge lengths in that order, or None."""
    e = edge_vectors(tile)
    r = edge_vectors(ref)
    if len(e) != len(r):
        return None
    lengths = np.linalg.norm(r, axis=1)
    zr = r / lengths[:, None]
    ue = e / np.linalg.norm(e, axis=1)[:, None]
    for shift in range(len(e)):
        z = np.roll(zr, -shift, axis=0)
        if np.all(np.abs(ue[:, 0] * z[:, 1] - ue[:, 1] * z[:, 0]) < 1e-7):
            return z, np.roll(lengths, -shift)
    return None


def tile_orientation(tile, reference) -> int:
    """+1 if ``tile``'s edge coefficients against ``reference`` are all
    positive, -1 if all negative; otherwise decided by the area-form cone."""
    if abs(signed_area(tile)) <= geom_tol():
        raise DegenerateTileError("tile has zero area")
    matched = _match_directions(tile, reference)
    if matched is None:
        raise DegenerateTileError("tile and reference edge directions differ")
    z, ref_coeffs = matched
    shape = TileShape.from_polygon(tile, z)
    if shape.orientation:
        return shape.orientation
    return 1 if same_cone(shape.coefficients, ref_coeffs, area_form(z)) else -1


def orientation_vector(t: Tiling, reference: Tiling | None = None) -> np.ndarray:
    ref = t if reference is None else reference
    return np.array([tile_orientation(tile, r) for tile, r in zip(t.tiles, ref.tiles)], dtype=int)


def tile_area_form(tile) -> AreaForm:
    return area_form(TileShape.from_polygon(tile).directions)
