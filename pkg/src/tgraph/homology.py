"""Homology tilings: tile paths for arbitrary interior intercepts.

The region stays fixed. Each tile path is still closed, but may wind the
wrong way or self-overlap; only the sum of winding numbers over all tiles
is constrained (1 inside the region, 0 outside). A choice of orientation
sigma picks one cone component per tile, and in that sector the areas
are reached by maximising the concave function sum_w A_w log q_w.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .areamap import InterceptModel
from .errors import (
    ConvergenceError,
    InfeasibleStartError,
    InvalidInputError,
    ParallelLinesError,
    TooLargeError,
)
from .geom import area_form, distance_to_path, edge_vectors, winding_number
from .solvers import left_kernel

MAX_SECTOR_WHITES = 16
DIVERGENCE_BOUND = 1e6
N_PROBES = 16


def homology_model(ref, graph=None) -> InterceptModel:
    if isinstance(ref, InterceptModel):
        if ref.b0 in ref.index:
            raise InvalidInputError("homology tilings keep every boundary segment fixed")
        return ref
    return InterceptModel(ref, free_boundary=False, graph=graph)


class _Cones:
    """Affine tile coefficients ``c_w(x) = M_w x + m_w`` and the cone
    functionals of each tile's area form."""

    def __init__(self, model: InterceptModel):
        self.model = model
        n = model.n
        zero = np.zeros(n)
        self.affine = []
        self.forms = []
        self.lengths = []
        for w, tile in enumerate(model.ref.tiles):
            m0 = model.coefficients(zero, w)
            cols = [model.coefficients(e, w) - m0 for e in np.eye(n)]
            self.affine.append((np.array(cols).T.reshape(len(m0), n), m0))
            self.forms.append(area_form(model.ref_units[w]))
            self.lengths.append(np.linalg.norm(edge_vectors(tile), axis=1))
        # psi is quadratic: its Hessian per tile is constant
        d0 = model.d_psi(zero)
        self.hessians = np.stack([model.d_psi(e) - d0 for e in np.eye(n)], axis=2)

    def coefficients(self, x, w):
        m, m0 = self.affine[w]
        return m @ x + m0

    def margin_terms(self, w, s):
        return self.forms[w].cone_margin_terms(s * self.lengths[w])

    def orientation(self, x, w) -> int:
        c = self.coefficients(x, w)
        form = self.forms[w]
        if form(c) <= 0:
            return 0
        return 1 if form.polar(c, self.lengths[w]) > 0 else -1

    def in_sector(self, x, sigma) -> bool:
        return all(self.orientation(x, w) == sigma[w] for w in range(len(sigma)))


_CONE_CACHE: dict = {}


def _cones(model: InterceptModel) -> _Cones:
    key = id(model)
    hit = _CONE_CACHE.get(key)
    if hit is None or hit[0] is not model:
        hit = (model, _Cones(model))
        _CONE_CACHE.clear()
        _CONE_CACHE[key] = hit
    return hit[1]


@dataclass
class HomologyTiling:
    intercepts: dict
    x: np.ndarray
    tiles: list
    q: np.ndarray
    region: np.ndarray
    orientations: np.ndarray
    mixed_sign: list
    winding_ok: bool
    criticality: float = float("nan")
    area_error: float = float("nan")
    iterations: int = 0
    perturbed: bool = False

    def reflected(self) -> "HomologyTiling":
        """Point reflection through the origin: a homology tiling of -R with
        every orientation reversed."""
        return HomologyTiling(
            {b: -v for b, v in self.intercepts.items()}, -self.x, [-p for p in self.tiles],
            self.q.copy(), -self.region, -self.orientations, self.mixed_sign, self.winding_ok,
            self.criticality, self.area_error, self.iterations, self.perturbed,
        )

    def to_json(self) -> dict:
        return {
            "region": self.region.tolist(),
            "tiles": [p.tolist() for p in self.tiles],
            "intercepts": {str(b): v for b, v in self.intercepts.items()},
            "areas": self.q.tolist(),
            "orientations": [int(s) for s in self.orientations],
            "homology": True,
        }


def _probe_points(region, paths, rng, count):
    pts = np.vstack([region] + list(paths))
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    pad = 0.1 * (hi - lo).max()
    scale = (hi - lo).max()
    out = []
    while len(out) < count:
        p = rng.uniform(lo - pad, hi + pad)
        if all(distance_to_path(path, p) > 1e-6 * scale for path in [region, *paths]):
            out.append(p)
    return out


def winding_sum_ok(region, paths, count: int = N_PROBES, seed: int = 0) -> bool:
    rng = np.random.default_rng(seed)
    for p in _probe_points(region, paths, rng, count):
        expected = 1 if winding_number(region, p) != 0 else 0
        if sum(winding_number(path, p) for path in paths) != expected:
            return False
    return True


def homology_tiles(ref, x, check: bool = True) -> HomologyTiling:
    """Homology tiling of ``ref``'s combinatorics at interior intercepts ``x``."""
    model = homology_model(ref)
    cones = _cones(model)
    x = model.as_vector(x)
    paths = model.tile_paths(x)
    q = model.psi(x)
    region = model.region(x)
    orient = np.array([cones.orientation(x, w) for w in range(model.graph.n_whites)])
    mixed = [
        w for w in range(model.graph.n_whites)
        if q[w] > 0 and len(set(np.sign(cones.coefficients(x, w)))) > 1
    ]
    ok = winding_sum_ok(region, paths) if check else True
    return HomologyTiling(model.as_dict(x), x, paths, q, region, orient, mixed, ok)


def find_sector_point(ref, sigma, bound: float = DIVERGENCE_BOUND, tol: float = 1e-9):
    """Point of V_T(sigma), or None.

    The reference intercepts are returned when they lie in the sector.
    Otherwise: each tile's cone component is ``t . c - |S c| > 0`` with
    ``c`` affine in the intercepts, so the point of largest margin solves
    a second-order cone program."""
    import cvxpy as cp

    model = homology_model(ref)
    cones = _cones(model)
    sigma = np.asarray(sigma)
    if cones.in_sector(model.x_ref, sigma):
        return model.x_ref.copy()
    diam = float(np.ptp(model.ref.region, axis=0).max())
    x = cp.Variable(model.n)
    tau = cp.Variable()
    cons = [tau <= diam, cp.abs(x) <= bound]
    for w in range(model.graph.n_whites):
        t, s = cones.margin_terms(w, int(sigma[w]))
        m, m0 = cones.affine[w]
        time_part = (t @ m) @ x + t @ m0
        if s.shape[0]:
            cons.append(time_part - cp.norm((s @ m) @ x + s @ m0, 2) >= tau)
        else:
            cons.append(time_part >= tau)
    prob = cp.Problem(cp.Maximize(tau), cons)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        prob.solve(solver=cp.SCS)
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or tau.value is None:
        return None
    if tau.value <= tol * diam:
        return None
    xv = np.asarray(x.value, dtype=float)
    return xv if cones.in_sector(xv, sigma) else None


def _objective(model, areas, x):
    q = model.psi(x)
    return float(areas @ np.log(q)) if np.all(q > 0) else -np.inf


def solve_homology(ref, areas, sigma=None, x0=None, max_iter: int = 200,
                   perturb: bool = True) -> HomologyTiling:
    """Homology tiling with tile areas ``areas`` and orientations ``sigma``.

    Damped Newton ascent on Q(x) = sum_w A_w log q_w(x), which is
    concave on the sector and tends to -inf at its boundary."""
    model = homology_model(ref)
    cones = _cones(model)
    nw = model.graph.n_whites
    areas = np.asarray(areas, dtype=float)
    if areas.shape != (nw,) or np.any(areas <= 0):
        raise InvalidInputError("areas must be positive, one per tile")
    total = float(np.sum(model.ref.tile_areas()))
    if abs(areas.sum() - total) > 1e-9 * max(1.0, total):
        raise InvalidInputError(f"areas sum to {areas.sum():.12g}, region area is {total:.12g}")
    sigma = model.sigma_ref if sigma is None else np.asarray(sigma)
    if x0 is None:
        x0 = find_sector_point(model, sigma)
        if x0 is None:
            raise InfeasibleStartError(f"no point found in sector {sigma_str(sigma)}")
    x = model.as_vector(x0).copy()
    if not cones.in_sector(x, sigma):
        raise InfeasibleStartError("starting intercepts are not in the requested sector")

    value = _objective(model, areas, x)
    it = 0
    for it in range(max_iter):
        q = model.psi(x)
        jac = model.d_psi(x)
        ratio = areas / q
        grad = jac.T @ ratio
        if np.abs(grad).max() <= 1e-13 * max(1.0, float(np.abs(jac).max())):
            break
        hess = np.einsum("w,wij->ij", ratio, cones.hessians) - (jac * (ratio / q)[:, None]).T @ jac
        try:
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = grad
        slope = float(grad @ step)
        if slope <= 0:
            step, slope = grad, float(grad @ grad)
        if slope < 1e-24:
            break
        if slope < 1e-12 * max(1.0, abs(value)):
            # inside the quadratic convergence region the objective no
            # longer resolves the improvement; take the full Newton step
            xn = x + step
            if not cones.in_sector(xn, sigma):
                break
            vn = _objective(model, areas, xn)
        else:
            t = 1.0
            while t > 1e-14:
                xn = x + t * step
                if cones.in_sector(xn, sigma):
                    vn = _objective(model, areas, xn)
                    if vn >= value + 1e-4 * t * slope:
                        break
                t *= 0.5
            else:
                break
        x, value = xn, vn
        if np.abs(x).max() > DIVERGENCE_BOUND:
            raise ConvergenceError("intercepts diverge")

    q = model.psi(x)
    jac = model.d_psi(x)
    crit = float(np.abs((areas / q) @ jac).max())
    err = float(np.abs(q - areas).max())
    if err > 1e-8 and perturb:
        # critical point on the hypersurface where the left kernel jumps:
        # re-solve from nearby generic areas and take that as the limit
        if left_kernel(jac).shape[1] > 1:
            rng = np.random.default_rng(0)
            bumped = areas + 1e-9 * rng.standard_normal(nw)
            bumped *= total / bumped.sum()
            out = solve_homology(model, bumped, sigma, x, max_iter, perturb=False)
            out.perturbed = True
            return out
    if crit > 1e-9 or err > 1e-8:
        raise ConvergenceError(f"no critical point reached (criticality {crit:.3g}, area error {err:.3g})")
    out = homology_tiles(model, x)
    out.criticality, out.area_error, out.iterations = crit, err, it
    return out


def random_homology_starts(ref, sigma, count: int, seed: int = 0, spread: float = 0.3,
                           max_tries: int = 20000) -> list[np.ndarray]:
    """Random points of V_T(sigma) around its max-margin point."""
    model = homology_model(ref)
    cones = _cones(model)
    centre = find_sector_point(model, sigma)
    if centre is None:
        raise InfeasibleStartError("sector is empty")
    rng = np.random.default_rng(seed)
    scale = spread * float(np.ptp(model.ref.region, axis=0).max())
    out = []
    for _ in range(max_tries):
        x = centre + rng.uniform(-scale, scale, size=model.n)
        if cones.in_sector(x, sigma):
            out.append(x)
            if len(out) == count:
                return out
        else:
            scale *= 0.995
    raise ConvergenceError(f"found only {len(out)} of {count} starts")


@dataclass
class SectorReport:
    sigma: tuple
    status: str
    region: str | None = None
    solution: HomologyTiling | None = None
    residual: float = float("nan")
    note: str = ""

    def to_json(self) -> dict:
        doc = {"sigma": sigma_str(self.sigma), "status": self.status, "region": self.region,
               "residual": self.residual}
        if self.solution is not None:
            doc["intercepts"] = {str(b): v for b, v in self.solution.intercepts.items()}
            doc["areas"] = self.solution.q.tolist()
        if self.note:
            doc["note"] = self.note
        return doc


def sigma_str(sigma) -> str:
    return "".join("+" if s > 0 else "-" for s in sigma)


def parse_sigma(text: str) -> np.ndarray:
    if not text or any(ch not in "+-" for ch in text):
        raise InvalidInputError(f"orientation string must use '+' and '-', got {text!r}")
    return np.array([1 if ch == "+" else -1 for ch in text])


@dataclass
class SectorSweep:
    reports: list
    seconds: float
    pairs_consistent: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def solved(self) -> list:
        return [r for r in self.reports if r.status == "solved"]


def _solve_sector(model, areas, sigma):
    try:
        x0 = find_sector_point(model, sigma)
    except ParallelLinesError:
        x0 = None
    if x0 is None:
        return None, "empty"
    try:
        return solve_homology(model, areas, sigma, x0), "solved"
    except (ConvergenceError, InfeasibleStartError) as exc:
        return exc, "not-converged"


def enumerate_sectors(ref, areas) -> SectorSweep:
    """Try every orientation vector sigma.

    A sector solved on R for -sigma yields, after point reflection, a
    homology tiling of -R with orientations sigma; both are reported."""
    model = homology_model(ref)
    nw = model.graph.n_whites
    if nw > MAX_SECTOR_WHITES:
        raise TooLargeError(f"{nw} tiles give 2^{nw} sectors; limit is {MAX_SECTOR_WHITES}")
    start = time.perf_counter()
    on_r = {}
    sigmas = [tuple(s) for s in itertools.product((1, -1), repeat=nw)]
    for s in sigmas:
        on_r[s] = _solve_sector(model, areas, np.array(s))
    reports = []
    consistent = True
    for s in sigmas:
        sol, status = on_r[s]
        neg = tuple(-v for v in s)
        if status == "solved":
            reports.append(SectorReport(s, "solved", "R", sol, sol.area_error))
            continue
        nsol, nstatus = on_r[neg]
        if nstatus == "solved":
            flipped = nsol.reflected()
            reports.append(SectorReport(s, "solved", "-R", flipped, flipped.area_error))
            if not np.array_equal(flipped.orientations, np.array(s)):
                consistent = False
            continue
        note = str(sol) if status == "not-converged" else ""
        reports.append(SectorReport(s, status if status == "not-converged" else nstatus, None, None,
                                    note=note))
    return SectorSweep(reports, time.perf_counter() - start, consistent)
