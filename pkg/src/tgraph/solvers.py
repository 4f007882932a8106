"""Shape prescription and graph-to-tiling reconstruction.

Both solvers produce a table of tile edge vectors ``E[w, b]`` and hand it
to :func:`assemble`, which lays the tiles out breadth-first across shared
segments and checks every reattachment."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .dimer import enumerate_matchings, kasteleyn_signs
from .errors import (
    AssemblyError,
    DegenerateGraphError,
    InvalidInputError,
    NotATilingError,
    RankDeficiencyError,
    TooLargeError,
)
from .geom import TileShape, edge_vectors, signed_area
from .tiling import TGraph, Tiling, build_graph, validate

KERNEL_RTOL = 1e-10
ASSEMBLY_TOL = 1e-8


def left_kernel(m: np.ndarray, rtol: float = KERNEL_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of ``{v : v @ m = 0}`` by SVD."""
    u, s, _ = np.linalg.svd(m, full_matrices=True)
    if s.size == 0:
        return u
    rank = int(np.sum(s > rtol * s[0]))
    return u[:, rank:]


@dataclass
class Assembly:
    tiles: list
    region: np.ndarray
    max_mismatch: float


def _raw_tiling(region, tiles) -> Tiling:
    t = object.__new__(Tiling)
    t.region = np.asarray(region, dtype=float)
    t.tiles = [np.asarray(x, dtype=float) for x in tiles]
    return t


def assemble(g: TGraph, edges: dict, anchor=(0.0, 0.0), tol: float = ASSEMBLY_TOL) -> Assembly:
    """Place tiles from their edge vectors.

    Along each segment the tiles of one side follow each other, so the start
    of tile w's edge on segment b sits at ``P_b + offset(w, b)`` where
    ``P_b`` is the start of the segment. The start of boundary segment 0 is
    put at ``anchor``; everything else is found by breadth-first search."""
    offsets = {}
    for b, blk in enumerate(g.blacks):
        acc = 0j
        for w in blk.left:
            offsets[(w, b)] = acc
            acc += edges[(w, b)]
        acc = 0j
        for w in blk.right:
            e = edges[(w, b)]
            offsets[(w, b)] = acc - e
            acc -= e
    cum = {}
    for w, rot in enumerate(g.rotation):
        acc = 0j
        for b in rot:
            cum[(w, b)] = acc
            acc += edges[(w, b)]

    scale = max((abs(z) for z in edges.values()), default=1.0) or 1.0
    seg_start: dict[int, complex] = {}
    tile_start: dict[int, complex] = {}
    root = g.boundary[0]
    seg_start[root] = complex(anchor[0], anchor[1])
    queue = deque([("b", root)])
    worst = 0.0
    while queue:
        color, v = queue.popleft()
        if color == "b":
            for w in g.blacks[v].tiles:
                pos = seg_start[v] + offsets[(w, v)] - cum[(w, v)]
                if w in tile_start:
                    worst = max(worst, abs(tile_start[w] - pos))
                else:
                    tile_start[w] = pos
                    queue.append(("w", w))
        else:
            for b in g.rotation[v]:
                pos = tile_start[v] + cum[(v, b)] - offsets[(v, b)]
                if b in seg_start:
                    worst = max(worst, abs(seg_start[b] - pos))
                else:
                    seg_start[b] = pos
                    queue.append(("b", b))
    if len(tile_start) != g.n_whites:
        raise AssemblyError("graph is disconnected")
    if worst > tol * max(scale, 1.0):
        raise AssemblyError(f"tiles do not fit together (mismatch {worst:.3g})")

    tiles = []
    for w, rot in enumerate(g.rotation):
        pts = [tile_start[w] + cum[(w, b)] for b in rot]
        tiles.append(np.array([[z.real, z.imag] for z in pts]))
    region = []
    for i, b in enumerate(g.boundary):
        blk = g.blacks[b]
        if blk.left:
            z = seg_start[b]
        else:
            z = seg_start[b] + sum(-edges[(w, b)] for w in blk.right)
        region.append([z.real, z.imag])
    return Assembly(tiles, np.array(region), worst)


def shape_coefficients(new_tile, ref_tile) -> np.ndarray:
    """Coefficients of ``new_tile`` along the reference tile's unit edge
    directions, indexed by reference edge."""
    if isinstance(new_tile, TileShape):
        zr = edge_vectors(ref_tile)
        zr = zr / np.linalg.norm(zr, axis=1)[:, None]
        z = new_tile.directions
        if len(z) != len(zr):
            raise InvalidInputError("shape has the wrong number of edges")
        dots = np.einsum("ij,ij->i", z, zr)
        if np.any(np.abs(np.abs(dots) - 1) > 1e-7):
            raise InvalidInputError("shape directions differ from the reference tile")
        return new_tile.coefficients * np.sign(dots)
    e = edge_vectors(np.asarray(new_tile, dtype=float))
    zr = edge_vectors(ref_tile)
    zr = zr / np.linalg.norm(zr, axis=1)[:, None]
    n = len(zr)
    if len(e) != n:
        raise InvalidInputError("shape has the wrong number of edges")
    for shift in range(n):
        ee = np.roll(e, -shift, axis=0)
        crosses = ee[:, 0] * zr[:, 1] - ee[:, 1] * zr[:, 0]
        coeffs = np.einsum("ij,ij->i", ee, zr)
        if np.all(np.abs(crosses) < 1e-7 * np.abs(coeffs).max()) and np.all(coeffs > 0):
            return coeffs
    raise InvalidInputError("shape is not in the reference tile's shape cone")


@dataclass
class PrescribeResult:
    tiling: Tiling
    scales: np.ndarray
    degenerate: bool
    closure_residual: float
    assembly_mismatch: float
    self_intersecting: bool = False


def prescribe_shapes(t: Tiling, shapes, g: TGraph | None = None) -> PrescribeResult:
    """Combinatorially equivalent tiling by homothetic copies of ``shapes``.

    ``shapes[w]`` is a polygon or :class:`TileShape` with tile w's edge
    directions. The homothety factors solve ``sum_w a_w K'[w, b] = 0`` on
    interior segments; they are normalised so tile 0 has ``a_0 > 0`` and
    the new region has the old region's area."""
    g = build_graph(t) if g is None else g
    if len(shapes) != g.n_whites:
        raise InvalidInputError("need one shape per tile")
    kprime = np.zeros((g.n_whites, g.n_blacks), dtype=complex)
    new_areas = np.zeros(g.n_whites)
    for w, rot in enumerate(g.rotation):
        ref = t.tiles[w]
        coeffs = shape_coefficients(shapes[w], ref)
        zr = edge_vectors(ref)
        zr = zr / np.linalg.norm(zr, axis=1)[:, None]
        ev = coeffs[:, None] * zr
        if np.abs(ev.sum(axis=0)).max() > 1e-9 * np.abs(coeffs).max():
            raise InvalidInputError(f"shape {w} does not close up")
        for k, b in enumerate(rot):
            kprime[w, b] = complex(ev[k, 0], ev[k, 1])
        new_areas[w] = signed_area(np.cumsum(ev, axis=0))

    interior = g.interior_blacks
    phases = np.array([np.conj(g.blacks[b].line.direction.phase) for b in interior])
    real_cols = (kprime[:, interior] * phases[None, :]).real
    ker = left_kernel(real_cols)
    if ker.shape[1] != 1:
        raise RankDeficiencyError(f"left kernel has dimension {ker.shape[1]}")
    a = ker[:, 0]
    pivot = next(w for w in range(len(a)) if abs(a[w]) > KERNEL_RTOL * np.abs(a).max())
    if a[pivot] < 0:
        a = -a
    a *= np.sqrt(t.area() / float(np.sum(a**2 * new_areas)))
    degenerate = bool(np.any(np.abs(a) <= KERNEL_RTOL * np.abs(a).max()))
    residual = float(np.abs(a @ kprime[:, interior]).max())

    edges = {(w, b): a[w] * kprime[w, b] for (w, b) in g.weights}
    asm = assemble(g, edges, anchor=t.region[0])
    # the new region is only locally injective in general; keep raw data then
    crossing = self_intersecting(asm.region)
    raw = degenerate or crossing
    tiling = _raw_tiling(asm.region, asm.tiles) if raw else Tiling(asm.region, asm.tiles)
    return PrescribeResult(tiling, a, degenerate, residual, asm.max_mismatch, crossing)


def check_2_nondegenerate(g: TGraph) -> bool:
    """Every pair of disjoint edges (at most one boundary endpoint) lies in
    some matching of W onto B_int plus exactly one boundary segment."""
    return not two_degenerate_witnesses(g, first_only=True)


def two_degenerate_witnesses(g: TGraph, first_only: bool = False) -> list:
    if g.n_whites > 14:
        raise TooLargeError("2-nondegeneracy check is limited to 14 whites")
    boundary = set(g.boundary_blacks)
    covers = []
    for b0 in g.boundary_blacks:
        ms, _ = enumerate_matchings(g, [b for b in boundary if b != b0])
        covers.extend(set(m.edges) for m in ms)
    edges = g.edges
    bad = []
    for i, (w1, b1) in enumerate(edges):
        for w2, b2 in edges[i + 1:]:
            if w1 == w2 or b1 == b2 or (b1 in boundary and b2 in boundary):
                continue
            if not any((w1, b1) in c and (w2, b2) in c for c in covers):
                bad.append(((w1, b1), (w2, b2)))
                if first_only:
                    return bad
    return bad


@dataclass
class Reconstruction:
    tiling: Tiling
    edges: dict
    white_scale: np.ndarray
    black_scale: np.ndarray
    report: object


def reconstruct_from_graph(
    g: TGraph,
    weights: dict | None = None,
    region=None,
    signs: dict | None = None,
    validate_result: bool = True,
) -> Reconstruction:
    """Tiling of ``region`` with the combinatorics of ``g`` whose edge
    weights are gauge equivalent to ``weights`` (default: moduli of g's
    weights). Boundary black ``g.boundary[i]`` is matched to region edge i.

    Three linear steps on a Kasteleyn matrix K with real signs: a left
    kernel vector on interior columns gives D_W; boundary column sums fix
    the boundary entries of D_B; the row equations K D_B 1 = 0 give the
    interior entries."""
    region = g.region if region is None else np.asarray(region, dtype=float)
    if region is None:
        raise InvalidInputError("a region polygon is required")
    if len(region) != g.n_region_edges:
        raise InvalidInputError("region edge count does not match the boundary identification")
    nu = {e: abs(z) for e, z in g.weights.items()} if weights is None else dict(weights)
    if any(v <= 0 for v in nu.values()):
        raise InvalidInputError("edge weights must be positive")
    signs = kasteleyn_signs(g) if signs is None else signs
    k = np.zeros((g.n_whites, g.n_blacks))
    for e, v in nu.items():
        k[e] = signs[e] * v

    interior = g.interior_blacks
    ker = left_kernel(k[:, interior])
    if ker.shape[1] != 1:
        raise DegenerateGraphError(f"left kernel on interior segments has dimension {ker.shape[1]}")
    vw = ker[:, 0]

    reg = np.asarray(region, dtype=float)
    q = np.roll(reg, -1, axis=0) - reg
    db = np.zeros(g.n_blacks, dtype=complex)
    for i, b in enumerate(g.boundary):
        col = float(vw @ k[:, b])
        if abs(col) < KERNEL_RTOL * np.abs(vw).max() * np.abs(k).max():
            raise DegenerateGraphError(f"boundary segment {b} has zero column sum")
        db[b] = complex(q[i, 0], q[i, 1]) / col

    bnd = g.boundary
    rhs = -(k[:, bnd] @ db[bnd])
    a = k[:, interior].astype(complex)
    sol, _, rank, _ = np.linalg.lstsq(a, rhs, rcond=None)
    if rank != len(interior):
        raise DegenerateGraphError("interior segment equations are rank deficient")
    if np.abs(a @ sol - rhs).max() > 1e-9 * max(np.abs(rhs).max(), 1.0):
        raise DegenerateGraphError("interior segment equations are inconsistent")
    db[interior] = sol

    edges = {(w, b): vw[w] * k[w, b] * db[b] for (w, b) in nu}
    for w in range(g.n_whites):
        ev = np.array([edges[(w, b)] for b in g.rotation[w]])
        if signed_area(np.column_stack([np.cumsum(ev).real, np.cumsum(ev).imag])) < 0:
            edges = {e: -z for e, z in edges.items()}
            break
    asm = assemble(g, edges, anchor=reg[0])
    tiling = Tiling(asm.region, asm.tiles) if validate_result else _raw_tiling(asm.region, asm.tiles)
    report = validate(tiling) if validate_result else None
    if validate_result:
        if not report.ok:
            raise NotATilingError(
                "assembled tiles do not form a tiling (the graph may violate the "
                "hypotheses under which the maximum principle guarantees one)",
                tiling,
                report,
            )
        if np.abs(asm.region - reg).max() > 1e-8 * max(1.0, np.abs(reg).max()):
            raise NotATilingError("assembled region differs from the target region", tiling)
    return Reconstruction(tiling, edges, vw, db, report)


def self_intersecting(poly) -> bool:
    """True if a closed polygon has two non-adjacent edges that cross."""
    pts = np.asarray(poly, dtype=float)
    n = len(pts)
    segs = [(pts[i], pts[(i + 1) % n]) for i in range(n)]

    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            a, b = segs[i]
            c, d = segs[j]
            if orient(a, b, c) * orient(a, b, d) < 0 and orient(c, d, a) * orient(c, d, b) < 0:
                return True
    return False
