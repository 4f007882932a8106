"""Kasteleyn matrices of t-graphs and a brute-force dimer oracle.

The oracle side (:func:`enumerate_matchings`) never touches a determinant;
it is the independent check for everything computed from ``K``."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .config import geom_tol
from .errors import (
    DegenerateRotationError,
    DegenerateWeightError,
    InvalidInputError,
    KasteleynSignError,
    ShapeMismatchError,
    SingularMatrixError,
    TooLargeError,
)
from .tiling import TGraph, Tiling, face_pairs

MAX_ENUM_WHITES = 20
SIGN_TOL = 1e-9


@dataclass
class KasteleynMatrix:
    entries: np.ndarray
    graph: TGraph

    @property
    def shape(self):
        return self.entries.shape

    def columns(self, b0: int) -> list[int]:
        """Column labels of the square reduction: interior blacks, then b0."""
        return self.graph.interior_blacks + [b0]

    def reduced(self, b0: int) -> np.ndarray:
        return self.entries[:, self.columns(b0)]

    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.entries))


@dataclass(frozen=True)
class Matching:
    edges: tuple
    weight: float
    complex_weight: complex = 0j

    def as_dict(self) -> dict[int, int]:
        return dict(self.edges)

    def __contains__(self, edge) -> bool:
        return tuple(edge) in self.edges


def alternating_product(k: np.ndarray, face: list[int]) -> complex:
    num = den = 1 + 0j
    for (wn, bn), (wd, bd) in face_pairs(face):
        num *= k[wn, bn]
        den *= k[wd, bd]
    if den == 0:
        raise DegenerateWeightError(f"zero entry on face {face}")
    return num / den


def sign_report(k: np.ndarray, g: TGraph) -> list[dict]:
    """Alternating product of every bounded face against ``(-1)^(l+1)``."""
    out = []
    for face in g.faces:
        ell = len(face) // 2
        z = alternating_product(k, face)
        expected = (-1) ** (ell + 1)
        rel_imag = abs(z.imag) / max(abs(z), 1e-300)
        out.append(
            {
                "face": list(face),
                "length": 2 * ell,
                "product": z,
                "expected_sign": expected,
                "ok": rel_imag <= SIGN_TOL and z.real * expected > 0,
            }
        )
    return out


def kasteleyn_from_tiling(g: TGraph) -> KasteleynMatrix:
    """K[w, b] = counterclockwise edge vector of tile w along segment b."""
    k = g.kasteleyn()
    bad = [r for r in sign_report(k, g) if not r["ok"]]
    if bad:
        raise KasteleynSignError(f"sign property fails on faces {[r['face'] for r in bad]}")
    return KasteleynMatrix(k, g)


def kasteleyn_signs(g: TGraph) -> dict[tuple[int, int], float]:
    """Real +-1 Kasteleyn signs from the face list, solved over GF(2)."""
    edges = g.edges
    index = {e: i for i, e in enumerate(edges)}
    rows = []
    rhs = []
    for face in g.faces:
        ell = len(face) // 2
        row = np.zeros(len(edges), dtype=np.uint8)
        for num, den in face_pairs(face):
            row[index[num]] ^= 1
            row[index[den]] ^= 1
        rows.append(row)
        rhs.append((ell + 1) % 2)
    if not rows:
        return {e: 1.0 for e in edges}
    a = np.array(rows)
    y = np.array(rhs, dtype=np.uint8)
    m, n = a.shape
    pivots = []
    r = 0
    for c in range(n):
        hit = next((i for i in range(r, m) if a[i, c]), None)
        if hit is None:
            continue
        a[[r, hit]] = a[[hit, r]]
        y[[r, hit]] = y[[hit, r]]
        for i in range(m):
            if i != r and a[i, c]:
                a[i] ^= a[r]
                y[i] ^= y[r]
        pivots.append(c)
        r += 1
        if r == m:
            break
    if np.any(y[r:]):
        raise KasteleynSignError("face sign conditions are inconsistent")
    x = np.zeros(n, dtype=np.uint8)
    for i, c in enumerate(pivots):
        x[c] = y[i]
    return {e: (-1.0 if x[index[e]] else 1.0) for e in edges}


def enumerate_matchings(g: TGraph, removed_blacks=(), weights: dict | None = None):
    """All perfect matchings of whites to the remaining blacks.

    Returns ``(matchings, Z)`` with ``Z`` the sum of products of edge-weight
    moduli. Each matching also carries ``sign(perm) * prod K`` so the signed
    sum can be compared with a determinant."""
    removed = set(removed_blacks)
    blacks = [b for b in range(g.n_blacks) if b not in removed]
    if len(blacks) != g.n_whites:
        raise InvalidInputError(f"{len(blacks)} blacks remain for {g.n_whites} whites")
    if g.n_whites > MAX_ENUM_WHITES:
        raise TooLargeError(f"{g.n_whites} whites exceeds the enumeration limit {MAX_ENUM_WHITES}")
    wts = g.weights if weights is None else weights
    col = {b: j for j, b in enumerate(blacks)}
    adj = {w: [b for b in g.rotation[w] if b in col] for w in range(g.n_whites)}

    found = []
    assign: dict[int, int] = {}
    used: set[int] = set()

    def rec():
        if len(assign) == g.n_whites:
            found.append(dict(assign))
            return
        best, options = None, None
        for w in range(g.n_whites):
            if w in assign:
                continue
            opts = [b for b in adj[w] if b not in used]
            if best is None or len(opts) < len(options):
                best, options = w, opts
                if not opts:
                    return
        for b in options:
            assign[best] = b
            used.add(b)
            rec()
            del assign[best]
            used.discard(b)

    rec()
    matchings = []
    for m in found:
        perm = [col[m[w]] for w in range(g.n_whites)]
        weight = math.prod(abs(wts[(w, m[w])]) for w in range(g.n_whites))
        cw = _perm_sign(perm) * np.prod([complex(wts[(w, m[w])]) for w in range(g.n_whites)])
        matchings.append(Matching(tuple(sorted(m.items())), weight, complex(cw)))
    matchings.sort(key=lambda mm: mm.edges)
    return matchings, sum(mm.weight for mm in matchings)


def _perm_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def removed_for(g: TGraph, b0: int) -> list[int]:
    return [b for b in g.boundary_blacks if b != b0]


def verify_kasteleyn(k: KasteleynMatrix, g: TGraph, b0: int) -> dict:
    """Compare |det K0| with the brute-force weighted matching sum."""
    det = np.linalg.det(k.reduced(b0))
    matchings, z = enumerate_matchings(g, removed_for(g, b0), _weights_from(k))
    rel = abs(abs(det) - z) / max(z, 1e-300)
    return {
        "b0": b0,
        "abs_det": float(abs(det)),
        "matching_sum": float(z),
        "n_matchings": len(matchings),
        "relative_error": float(rel),
        "ok": bool(rel <= 1e-10),
    }


def _weights_from(k: KasteleynMatrix) -> dict:
    return {e: complex(k.entries[e]) for e in k.graph.weights}


def canonical_matching(t: Tiling, g: TGraph, b0: int) -> Matching:
    """Lowest-vertex matching of W onto B_int + {b0}.

    Coordinates are turned so b0 runs along +x with the region above, then
    by a small positive angle delta so every tile has a unique lowest
    vertex; each tile is matched to the segment that starts at that vertex,
    and the leftmost tile on b0 to b0."""
    blk0 = g.blacks[b0]
    if not blk0.is_boundary:
        raise InvalidInputError("b0 must be a boundary segment")
    i = blk0.boundary
    reg = t.region
    q = reg[(i + 1) % len(reg)] - reg[i]
    alpha = math.atan2(q[1], q[0])
    tol = 10 * geom_tol()

    def lowest(delta):
        c, s = math.cos(delta - alpha), math.sin(delta - alpha)
        rot = np.array([[c, -s], [s, c]])
        out = []
        for tile in t.tiles:
            y = (tile @ rot.T)[:, 1]
            order = np.argsort(y)
            if y[order[1]] - y[order[0]] <= 1e-12 * max(1.0, float(np.abs(y).max())):
                return None
            out.append(int(order[0]))
        return out

    chosen = None
    for j in range(40):
        delta = 1e-3 * 2.0 ** (-j)
        a, b = lowest(delta), lowest(delta / 2)
        if a is not None and a == b:
            chosen = a
            break
    if chosen is None:
        raise DegenerateRotationError("no rotation gives unique lowest vertices")

    first = blk0.left[0] if blk0.left else blk0.right[-1]
    match = {first: b0}
    options = {}
    for w, tile in enumerate(t.tiles):
        if w == first:
            continue
        k = chosen[w]
        v = tile[k]
        rot = g.rotation[w]
        options[w] = [
            b for b in (rot[k - 1], rot[k])
            if np.linalg.norm(g.blacks[b].start - v) <= tol or np.linalg.norm(g.blacks[b].end - v) <= tol
        ]
        if not options[w]:
            raise DegenerateRotationError(f"tile {w}: lowest vertex is not a T")
    # a multi-legged T offers two legs; the flanking tiles claim theirs first
    for w in sorted(options, key=lambda w: len(options[w])):
        free = [b for b in options[w] if b not in match.values()]
        if not free:
            raise DegenerateRotationError(f"tile {w}: no free segment at its lowest vertex")
        match[w] = free[0]
    allowed = set(g.interior_blacks) | {b0}
    if len(set(match.values())) != g.n_whites or not set(match.values()) <= allowed:
        raise DegenerateRotationError("lowest-vertex rule did not produce a perfect matching")
    edges = tuple(sorted(match.items()))
    weight = math.prod(abs(g.weights[e]) for e in edges)
    return Matching(edges, weight)


def face_weights(k: KasteleynMatrix | np.ndarray, g: TGraph) -> np.ndarray:
    """X_f = |alternating product| of edge weights around each bounded face."""
    entries = k.entries if isinstance(k, KasteleynMatrix) else np.asarray(k)
    return np.array([abs(alternating_product(np.abs(entries), f)) for f in g.faces])


def gauge_equivalent(k1, k2, rtol: float = 1e-9):
    """Diagonal (D_W, D_B) with K2 = D_W K1 D_B, or None.

    Propagated along a spanning forest of the support graph, then checked
    on every remaining entry."""
    a = k1.entries if isinstance(k1, KasteleynMatrix) else np.asarray(k1, dtype=complex)
    b = k2.entries if isinstance(k2, KasteleynMatrix) else np.asarray(k2, dtype=complex)
    if a.shape != b.shape:
        raise ShapeMismatchError("matrices have different shapes")
    scale = max(np.abs(a).max(), np.abs(b).max(), 1e-300)
    sa, sb = np.abs(a) > 1e-14 * scale, np.abs(b) > 1e-14 * scale
    if not np.array_equal(sa, sb):
        raise ShapeMismatchError("matrices have different supports")
    nw, nb = a.shape
    dw = np.full(nw, np.nan, dtype=complex)
    db = np.full(nb, np.nan, dtype=complex)
    for root in range(nw):
        if not np.isnan(dw[root]):
            continue
        dw[root] = 1.0
        queue = deque([("w", root)])
        while queue:
            color, v = queue.popleft()
            if color == "w":
                for j in np.nonzero(sa[v])[0]:
                    if np.isnan(db[j]):
                        db[j] = b[v, j] / (dw[v] * a[v, j])
                        queue.append(("b", j))
            else:
                for i in np.nonzero(sa[:, v])[0]:
                    if np.isnan(dw[i]):
                        dw[i] = b[i, v] / (a[i, v] * db[v])
                        queue.append(("w", i))
    db[np.isnan(db)] = 1.0
    recon = dw[:, None] * a * db[None, :]
    if np.abs(recon - b).max() > rtol * scale:
        return None
    return np.diag(dw), np.diag(db)


def _inverse(k0: np.ndarray) -> np.ndarray:
    if k0.shape[0] != k0.shape[1]:
        raise ShapeMismatchError("reduced Kasteleyn matrix must be square")
    cond = np.linalg.cond(k0)
    if not np.isfinite(cond) or cond > 1e13:
        raise SingularMatrixError("reduced Kasteleyn matrix is singular")
    return np.linalg.inv(k0)


def edge_probabilities(k0: np.ndarray) -> np.ndarray:
    """Matrix of K(w,b) K^{-1}(b,w) over all entries of a square K0."""
    k0 = np.asarray(k0)
    p = k0 * _inverse(k0).T
    return _realify(p)


def _realify(p):
    p = np.asarray(p)
    if np.iscomplexobj(p):
        if np.abs(p.imag).max(initial=0.0) > 1e-9:
            raise KasteleynSignError("probabilities have a nonzero imaginary part")
        p = p.real
    return p


def edge_probability(k0: np.ndarray, w: int, j: int) -> float:
    """Probability of edge (w, column j) in the dimer measure of K0."""
    k0 = np.asarray(k0)
    return float(_realify(k0[w, j] * _inverse(k0)[j, w]))


def pair_probability(k0: np.ndarray, e1: tuple[int, int], e2: tuple[int, int]) -> float:
    (w1, j1), (w2, j2) = e1, e2
    if w1 == w2 or j1 == j2:
        return 0.0
    k0 = np.asarray(k0)
    inv = _inverse(k0)
    det = inv[j1, w1] * inv[j2, w2] - inv[j2, w1] * inv[j1, w2]
    return float(_realify(k0[w1, j1] * k0[w2, j2] * det))


def matching_frequencies(matchings, z) -> dict:
    """Weighted edge frequencies from an enumeration."""
    freq: dict = {}
    for m in matchings:
        for e in m.edges:
            freq[e] = freq.get(e, 0.0) + m.weight / z
    return freq


def pair_frequency(matchings, z, e1, e2) -> float:
    return sum(m.weight for m in matchings if tuple(e1) in m.edges and tuple(e2) in m.edges) / z
