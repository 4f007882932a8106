"""Intercepts to areas.

With tile edge directions frozen, a tiling with quad faces is fixed by the
intercepts of its interior segments plus one free boundary segment b0.
Tile areas are quadratic in these intercepts and the Jacobian is a
Kasteleyn matrix with real entries.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    InvalidInputError,
    OutsideImageError,
    ParallelLinesError,
    SectorBoundaryError,
    SingularMatrixError,
    UnsupportedStructureError,
)
from .geom import edge_vectors, intersect, signed_area
from .tiling import TGraph, Tiling, build_graph, orientation_vector

ARMIJO = 1e-4
MAX_NEWTON = 200
AREA_TOL = 1e-10


class InterceptModel:
    """Tile paths of a reference tiling as functions of intercepts.

    ``columns`` lists the segments whose intercepts vary: the interior
    segments, then ``b0`` when ``free_boundary`` is set. All other lines
    stay at their reference position."""

    def __init__(self, ref: Tiling, b0: int | None = None, free_boundary: bool = True,
                 graph: TGraph | None = None):
        self.ref = ref
        self.graph = build_graph(ref) if graph is None else graph
        g = self.graph
        for face, length in zip(g.faces, g.face_lengths()):
            if length != 4:
                raise UnsupportedStructureError(f"face {face} has length {length}; quad faces required")
        self.b0 = g.boundary[0] if b0 is None else b0
        if free_boundary and not g.blacks[self.b0].is_boundary:
            raise InvalidInputError(f"segment {self.b0} is not a boundary segment")
        self.columns = list(g.interior_blacks) + ([self.b0] if free_boundary else [])
        self.index = {b: j for j, b in enumerate(self.columns)}
        self.lines = [blk.line for blk in g.blacks]
        self.x_ref = np.array([self.lines[b].intercept for b in self.columns])
        self.ref_units = []
        for w, tile in enumerate(ref.tiles):
            e = edge_vectors(tile)
            self.ref_units.append(e / np.linalg.norm(e, axis=1)[:, None])
        self.sigma_ref = orientation_vector(ref)

    @property
    def n(self) -> int:
        return len(self.columns)

    def as_vector(self, x) -> np.ndarray:
        if isinstance(x, dict):
            if set(x) != set(self.columns):
                raise InvalidInputError("intercepts must be indexed by the model's segments")
            return np.array([x[b] for b in self.columns], dtype=float)
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise InvalidInputError(f"expected {self.n} intercepts, got shape {x.shape}")
        return x

    def as_dict(self, x) -> dict[int, float]:
        return {b: float(v) for b, v in zip(self.columns, self.as_vector(x))}

    def line(self, b: int, x):
        j = self.index.get(b)
        return self.lines[b] if j is None else self.lines[b].shifted(float(x[j]))

    def tile_path(self, x, w: int) -> np.ndarray:
        """Vertex k is where the lines of edges k-1 and k cross."""
        x = self.as_vector(x)
        rot = self.graph.rotation[w]
        ls = [self.line(b, x) for b in rot]
        return np.array([intersect(ls[k - 1], ls[k]) for k in range(len(ls))])

    def tile_paths(self, x) -> list[np.ndarray]:
        x = self.as_vector(x)
        return [self.tile_path(x, w) for w in range(self.graph.n_whites)]

    def region(self, x) -> np.ndarray:
        x = self.as_vector(x)
        ls = [self.line(b, x) for b in self.graph.boundary]
        return np.array([intersect(ls[k - 1], ls[k]) for k in range(len(ls))])

    def coefficients(self, x, w: int) -> np.ndarray:
        """Edge coefficients of tile w against the reference unit directions."""
        e = edge_vectors(self.tile_path(x, w))
        return np.einsum("ij,ij->i", e, self.ref_units[w])

    def psi(self, x) -> np.ndarray:
        return np.array([signed_area(p) for p in self.tile_paths(x)])

    def d_psi(self, x) -> np.ndarray:
        """dA_w/di_b = -(e_wb . u_b): pushing a line along its normal eats
        into the tile on the normal side by the current edge length."""
        x = self.as_vector(x)
        jac = np.zeros((self.graph.n_whites, self.n))
        for w, rot in enumerate(self.graph.rotation):
            e = edge_vectors(self.tile_path(x, w))
            for k, b in enumerate(rot):
                j = self.index.get(b)
                if j is not None:
                    jac[w, j] = -float(e[k] @ self.lines[b].direction.unit)
        return jac

    def signed_lengths(self, x) -> np.ndarray:
        """The same signed edge lengths over all segments (|W| x |B|)."""
        x = self.as_vector(x)
        out = np.zeros((self.graph.n_whites, self.graph.n_blacks))
        for w, rot in enumerate(self.graph.rotation):
            e = edge_vectors(self.tile_path(x, w))
            for k, b in enumerate(rot):
                out[w, b] = -float(e[k] @ self.lines[b].direction.unit)
        return out

    def in_sector(self, x, sigma) -> bool:
        """Every tile is a genuine convex tile with orientation sigma_w."""
        try:
            for w in range(self.graph.n_whites):
                if np.any(sigma[w] * self.coefficients(x, w) <= 0):
                    return False
        except ParallelLinesError:
            return False
        return True

    def tiling(self, x) -> Tiling:
        return Tiling(self.region(x), self.tile_paths(x))


def _model(t_ref, b0=None) -> InterceptModel:
    return t_ref if isinstance(t_ref, InterceptModel) else InterceptModel(t_ref, b0)


def psi(t_ref, x, b0: int | None = None) -> np.ndarray:
    return _model(t_ref, b0).psi(x)


def d_psi(t_ref, x, b0: int | None = None) -> np.ndarray:
    return _model(t_ref, b0).d_psi(x)


@dataclass
class NewtonResult:
    x: np.ndarray
    intercepts: dict
    iterations: int
    residual: float


def psi_inverse(t_ref, target, x0=None, sigma=None, b0: int | None = None,
                tol: float = AREA_TOL, max_iter: int = MAX_NEWTON) -> NewtonResult:
    """Intercepts in sector sigma whose tile areas equal ``target``.

    Damped Newton on psi(x) - target with backtracking on the squared
    residual; trial points outside the sector are rejected."""
    model = _model(t_ref, b0)
    target = np.asarray(target, dtype=float)
    if target.shape != (model.graph.n_whites,):
        raise InvalidInputError("one target area per tile is required")
    x = model.x_ref.copy() if x0 is None else model.as_vector(x0).copy()
    sigma = model.sigma_ref if sigma is None else np.asarray(sigma)
    if not model.in_sector(x, sigma):
        raise SectorBoundaryError("starting point is not in the requested sector")
    f = model.psi(x) - target
    for it in range(max_iter + 1):
        res = float(np.abs(f).max())
        if res <= tol:
            return NewtonResult(x, model.as_dict(x), it, res)
        jac = model.d_psi(x)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            raise SingularMatrixError("Jacobian is singular") from None
        norm2 = f @ f
        t = 1.0
        left_sector = False
        while t > 1e-14:
            xn = x + t * step
            if model.in_sector(xn, sigma):
                fn = model.psi(xn) - target
                if fn @ fn <= (1 - 2 * ARMIJO * t) * norm2:
                    break
            else:
                left_sector = True
            t *= 0.5
        else:
            if left_sector:
                raise SectorBoundaryError(f"Newton step leaves the sector (residual {res:.3g})")
            raise OutsideImageError(f"line search stalled (residual {res:.3g})")
        x, f = xn, fn
    raise OutsideImageError(f"no convergence in {max_iter} iterations (target may be outside the image)")


@dataclass
class BlowAirReport:
    white: int
    products: dict
    ok: bool
    total: float


def blow_air_check(t_ref, x, w: int, b0: int | None = None) -> BlowAirReport:
    """Check that dA_w/di_b and di_b/dA_w agree in sign on every edge of w.

    The product is the probability of edge wb in the dimer model on the
    graph with all boundary segments but b0 removed."""
    model = _model(t_ref, b0)
    jac = model.d_psi(x)
    inv = _safe_inverse(jac)
    products = {}
    for b in model.graph.rotation[w]:
        j = model.index.get(b)
        if j is not None:
            products[b] = float(jac[w, j] * inv[j, w])
    ok = all(p >= -1e-12 for p in products.values())
    return BlowAirReport(w, products, ok, float(sum(products.values())))


def _safe_inverse(jac: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(jac)
    if not np.isfinite(cond) or cond > 1e13:
        raise SingularMatrixError("Jacobian is singular")
    return np.linalg.inv(jac)


def psi_edge_probabilities(t_ref, x, b0: int | None = None) -> dict:
    """Edge probabilities K_psi(w,b) K_psi^{-1}(b,w) keyed by (w, b)."""
    model = _model(t_ref, b0)
    jac = model.d_psi(x)
    inv = _safe_inverse(jac)
    return {(w, b): float(jac[w, j] * inv[j, w])
            for w in range(model.graph.n_whites)
            for b, j in model.index.items() if jac[w, j] != 0}


def psi_pair_probability(t_ref, x, e1, e2, b0: int | None = None) -> float:
    """Jacobian of (A_w1, A_w2) -> (i_b1, i_b2) times K_psi(e1) K_psi(e2)."""
    model = _model(t_ref, b0)
    (w1, b1), (w2, b2) = e1, e2
    if w1 == w2 or b1 == b2:
        return 0.0
    jac = model.d_psi(x)
    inv = _safe_inverse(jac)
    j1, j2 = model.index[b1], model.index[b2]
    minor = inv[j1, w1] * inv[j2, w2] - inv[j1, w2] * inv[j2, w1]
    return float(jac[w1, j1] * jac[w2, j2] * minor)


def random_sector_starts(model: InterceptModel, sigma, count: int, seed: int = 0,
                         spread: float = 0.2, max_tries: int = 10000) -> list[np.ndarray]:
    """Random points of the sector near the reference, by rejection."""
    rng = np.random.default_rng(seed)
    scale = spread * max(1.0, float(np.ptp(model.ref.region, axis=0).max()))
    x_ref = model.x_ref
    out = []
    for _ in range(max_tries):
        x = x_ref + rng.uniform(-scale, scale, size=model.n)
        if model.in_sector(x, sigma):
            out.append(x)
            if len(out) == count:
                return out
        else:
            scale *= 0.999
    raise ConvergenceError(f"found only {len(out)} of {count} sector starts")
