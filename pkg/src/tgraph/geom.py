"""Planar geometry primitives: directions, lines with signed intercepts,
polygons, signed areas, and the quadratic area form of a tile shape.

Lines are stored as ``(theta, intercept)`` with ``theta`` in ``[0, pi)`` and
unit normal ``n = (-sin theta, cos theta)``; a point ``p`` lies on the line
iff ``p . n == intercept``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import geom_tol
from .errors import (
    DegenerateDirectionsError,
    InvalidInputError,
    NotInConeError,
    ParallelLinesError,
)


@dataclass(frozen=True)
class Direction:
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", reduce_angle(self.theta))

    @classmethod
    def from_vector(cls, v) -> "Direction":
        return cls(math.atan2(v[1], v[0]))

    @property
    def unit(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta)])

    @property
    def normal(self) -> np.ndarray:
        return np.array([-math.sin(self.theta), math.cos(self.theta)])

    @property
    def phase(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))

    def same_as(self, other: "Direction", tol: float | None = None) -> bool:
        tol = geom_tol() if tol is None else tol
        d = abs(self.theta - other.theta)
        return d < tol or abs(d - math.pi) < tol


def reduce_angle(theta: float) -> float:
    t = math.fmod(theta, math.pi)
    if t < 0:
        t += math.pi
    if t >= math.pi:
        t -= math.pi
    return t


@dataclass(frozen=True)
class Line:
    direction: Direction
    intercept: float

    @classmethod
    def through(cls, p, q) -> "Line":
        """Line through two points."""
        p = np.asarray(p, dtype=float)
        d = Direction.from_vector(np.asarray(q, dtype=float) - p)
        return cls(d, float(p @ d.normal))

    def contains(self, p, tol: float | None = None) -> bool:
        tol = geom_tol() if tol is None else tol
        return abs(self.signed_distance(p)) <= tol

    def signed_distance(self, p) -> float:
        return float(np.asarray(p, dtype=float) @ self.direction.normal - self.intercept)

    def shifted(self, intercept: float) -> "Line":
        return Line(self.direction, intercept)


def intersect(l1: Line, l2: Line, tol: float | None = None) -> np.ndarray:
    """Unique intersection point of two non-parallel lines."""
    tol = geom_tol() if tol is None else tol
    n1, n2 = l1.direction.normal, l2.direction.normal
    det = n1[0] * n2[1] - n1[1] * n2[0]
    if abs(det) < tol:
        raise ParallelLinesError(
            f"lines with directions {l1.direction.theta:.6g} and "
            f"{l2.direction.theta:.6g} are parallel"
        )
    x = (l1.intercept * n2[1] - n1[1] * l2.intercept) / det
    y = (n1[0] * l2.intercept - l1.intercept * n2[0]) / det
    return np.array([x, y])


def signed_area(path) -> float:
    """Integral of x dy over the closed polygonal path (shoelace value)."""
    pts = np.asarray(path, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise InvalidInputError("signed_area needs at least 3 points")
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return float(0.5 * np.sum((x + xn) * (yn - y)))


def cross(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def edge_vectors(poly) -> np.ndarray:
    pts = np.asarray(poly, dtype=float)
    return np.roll(pts, -1, axis=0) - pts


def normalize_polygon(poly, tol: float | None = None) -> np.ndarray:
    """Drop repeated and collinear vertices, return counterclockwise order."""
    tol = geom_tol() if tol is None else tol
    pts = [np.asarray(p, dtype=float) for p in poly]
    out = []
    for p in pts:
        if not out or np.linalg.norm(p - out[-1]) > tol:
            out.append(p)
    if len(out) > 1 and np.linalg.norm(out[0] - out[-1]) <= tol:
        out.pop()
    changed = True
    while changed and len(out) >= 3:
        changed = False
        for k in range(len(out)):
            a, b, c = out[k - 1], out[k], out[(k + 1) % len(out)]
            ab, bc = b - a, c - b
            if abs(cross(ab, bc)) <= tol * max(np.linalg.norm(ab), np.linalg.norm(bc), 1.0) and ab @ bc > 0:
                del out[k]
                changed = True
                break
    arr = np.array(out)
    if len(arr) >= 3 and signed_area(arr) < 0:
        arr = arr[::-1].copy()
    return arr


def is_convex(poly, tol: float | None = None) -> bool:
    tol = geom_tol() if tol is None else tol
    pts = np.asarray(poly, dtype=float)
    if len(pts) < 3 or signed_area(pts) <= tol:
        return False
    e = edge_vectors(pts)
    for k in range(len(e)):
        if cross(e[k - 1], e[k]) < -tol:
            return False
    return True


def point_in_convex(poly, p, tol: float | None = None) -> bool:
    """Closed containment test for a counterclockwise convex polygon."""
    tol = geom_tol() if tol is None else tol
    pts = np.asarray(poly, dtype=float)
    p = np.asarray(p, dtype=float)
    for a, e in zip(pts, edge_vectors(pts)):
        length = np.linalg.norm(e)
        if cross(e, p - a) / length < -tol:
            return False
    return True


def convex_overlap_depth(p1, p2) -> float:
    """Minimum separating-axis penetration of two convex polygons.

    Positive means the interiors overlap by at least that width."""
    best = math.inf
    for poly in (p1, p2):
        for e in edge_vectors(poly):
            n = np.array([-e[1], e[0]]) / np.linalg.norm(e)
            a, b = np.asarray(p1) @ n, np.asarray(p2) @ n
            depth = min(a.max(), b.max()) - max(a.min(), b.min())
            best = min(best, depth)
    return float(best)


def winding_number(path, p) -> int:
    """Winding number of a closed polygonal path around ``p``."""
    pts = np.asarray(path, dtype=float)
    px, py = float(p[0]), float(p[1])
    wn = 0
    n = len(pts)
    for k in range(n):
        x0, y0 = pts[k]
        x1, y1 = pts[(k + 1) % n]
        side = (x1 - x0) * (py - y0) - (px - x0) * (y1 - y0)
        if y0 <= py:
            if y1 > py and side > 0:
                wn += 1
        elif y1 <= py and side < 0:
            wn -= 1
    return wn


def distance_to_path(path, p) -> float:
    pts = np.asarray(path, dtype=float)
    p = np.asarray(p, dtype=float)
    best = math.inf
    for a, b in zip(pts, np.roll(pts, -1, axis=0)):
        ab = b - a
        denom = ab @ ab
        t = 0.0 if denom == 0 else min(1.0, max(0.0, (p - a) @ ab / denom))
        best = min(best, float(np.linalg.norm(a + t * ab - p)))
    return best


@dataclass(frozen=True)
class TileShape:
    """A closed path with edges ``a_i z_i`` for fixed unit directions ``z_i``."""

    directions: np.ndarray
    coefficients: np.ndarray

    @classmethod
    def from_polygon(cls, poly, directions=None) -> "TileShape":
        """Shape of ``poly``; coefficients are measured against ``directions``
        (default: the polygon's own unit edge directions)."""
        e = edge_vectors(poly)
        if directions is None:
            directions = e / np.linalg.norm(e, axis=1)[:, None]
        directions = np.asarray(directions, dtype=float)
        if len(directions) != len(e):
            raise InvalidInputError("edge count does not match direction count")
        return cls(directions, np.einsum("ij,ij->i", e, directions))

    @property
    def n(self) -> int:
        return len(self.directions)

    def closure_residual(self) -> float:
        return float(np.abs(self.coefficients @ self.directions).max())

    def edge_vectors(self) -> np.ndarray:
        return self.coefficients[:, None] * self.directions

    def vertices(self, start=(0.0, 0.0)) -> np.ndarray:
        e = self.edge_vectors()
        return np.asarray(start, dtype=float) + np.vstack([np.zeros(2), np.cumsum(e, axis=0)[:-1]])

    @property
    def orientation(self) -> int:
        if np.all(self.coefficients > 0):
            return 1
        if np.all(self.coefficients < 0):
            return -1
        return 0


@dataclass(frozen=True)
class AreaForm:
    """Signed-area quadratic form restricted to the closure subspace.

    ``full`` acts on coefficient vectors in R^n; ``basis`` (n x (n-2)) is an
    orthonormal basis of ``{a : sum a_i z_i = 0}``; ``matrix`` is the form in
    that basis."""

    full: np.ndarray
    basis: np.ndarray
    matrix: np.ndarray
    _eig: tuple = field(default=None, repr=False, compare=False)

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    def __call__(self, a) -> float:
        a = np.asarray(a, dtype=float)
        return float(a @ self.full @ a)

    def polar(self, x, y) -> float:
        return float(np.asarray(x, dtype=float) @ self.full @ np.asarray(y, dtype=float))

    def eigen(self):
        vals, vecs = np.linalg.eigh(self.matrix)
        return vals, vecs

    def signature(self, tol: float = 1e-12) -> tuple[int, int]:
        vals = np.linalg.eigvalsh(self.matrix)
        scale = max(1.0, float(np.abs(vals).max()))
        return int(np.sum(vals > tol * scale)), int(np.sum(vals < -tol * scale))

    def cone_margin_terms(self, reference):
        """Linear functionals (time, space) with ``q = time^2 - |space|^2``
        on the subspace, ``time`` oriented positive on ``reference``'s cone.

        The component containing ``reference`` is ``time - |space| > 0``."""
        vals, vecs = self.eigen()
        k = int(np.argmax(vals))
        t = math.sqrt(vals[k]) * (self.basis @ vecs[:, k])
        if t @ np.asarray(reference, dtype=float) < 0:
            t = -t
        rest = [j for j in range(len(vals)) if j != k]
        s = np.array([math.sqrt(max(-vals[j], 0.0)) * (self.basis @ vecs[:, j]) for j in rest])
        return t, s.reshape(len(rest), len(t))


def closure_basis(directions) -> np.ndarray:
    """Orthonormal basis of the closure subspace, by eliminating the last two
    coefficients and orthonormalizing in fixed order."""
    z = np.asarray(directions, dtype=float)
    n = len(z)
    last = z[n - 2:].T  # 2x2, columns z_{n-1}, z_n
    if abs(np.linalg.det(last)) < geom_tol():
        raise DegenerateDirectionsError("last two directions are parallel")
    raw = np.zeros((n, n - 2))
    for j in range(n - 2):
        raw[j, j] = 1.0
        raw[n - 2:, j] = -np.linalg.solve(last, z[j])
    q, r = np.linalg.qr(raw)
    # fix signs so the basis is independent of LAPACK conventions
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def area_form(shape: TileShape | np.ndarray) -> AreaForm:
    """Quadratic form giving the signed area of the path with edges a_i z_i."""
    z = shape.directions if isinstance(shape, TileShape) else np.asarray(shape, dtype=float)
    n = len(z)
    if n < 3:
        raise DegenerateDirectionsError("need at least 3 directions")
    for k in range(n):
        if abs(cross(z[k - 1], z[k])) < geom_tol():
            raise DegenerateDirectionsError(f"directions {(k - 1) % n} and {k} are parallel")
    full = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            full[i, j] = full[j, i] = 0.25 * cross(z[i], z[j])
    basis = closure_basis(z)
    return AreaForm(full, basis, basis.T @ full @ basis)


def same_cone(x, y, form: AreaForm) -> bool:
    """True iff x and y lie in the same component of ``{q > 0}``."""
    if form(x) <= 0 or form(y) <= 0:
        raise NotInConeError("both vectors must have positive area")
    return form.polar(x, y) > 0
