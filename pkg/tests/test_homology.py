import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tgraph.areamap import InterceptModel, psi_inverse
from tgraph.errors import InfeasibleStartError, InvalidInputError, TooLargeError
from tgraph.fixtures import get_fixture, pin5, rect, sq2
from tgraph.geom import area_form, same_cone, winding_number
from tgraph.homology import (
    enumerate_sectors,
    find_sector_point,
    homology_model,
    homology_tiles,
    parse_sigma,
    random_homology_starts,
    sigma_str,
    solve_homology,
    winding_sum_ok,
)
from tgraph.tiling import Tiling

from conftest import QUAD_FIXTURES


@pytest.fixture(scope="module")
def models():
    return {name: homology_model(get_fixture(name)) for name in QUAD_FIXTURES}


def random_areas(rng, t):
    a = rng.uniform(0.2, 1.0, t.n_tiles)
    return a * t.area() / a.sum()


@pytest.mark.parametrize("name", QUAD_FIXTURES)
def test_reference_intercepts_give_the_reference_tiles(models, name):
    model = models[name]
    h = homology_tiles(model, model.x_ref)
    for a, b in zip(h.tiles, model.ref.tiles):
        np.testing.assert_allclose(a, b, atol=1e-12)
    assert np.all(h.q > 0) and h.winding_ok
    assert list(h.orientations) == [1] * model.graph.n_whites
    assert h.mixed_sign == []


def test_sq2_cut_above_the_region():
    h = homology_tiles(sq2(), [1.5])
    np.testing.assert_allclose(h.q, [1.5, -0.5])
    assert h.winding_ok
    assert winding_number(h.tiles[1], (0.5, 1.2)) == -1
    assert list(h.orientations) == [1, 0]


@pytest.mark.parametrize("name", QUAD_FIXTURES)
def test_winding_identity_and_total_area(models, name, rng):
    model = models[name]
    area = model.ref.area()
    for _ in range(100):
        x = model.x_ref + rng.normal(scale=1.0, size=model.n)
        paths = model.tile_paths(x)
        assert model.psi(x).sum() == pytest.approx(area, abs=1e-10)
        assert winding_sum_ok(model.ref.region, paths, seed=int(rng.integers(1 << 30)))


def test_sq2_flipped_top_sector_is_empty_on_a_dense_grid():
    """Independent oracle: every width stays 1 while heights move, so a
    rectangle in the negative cone never appears, even with b0 free."""
    model = InterceptModel(sq2(), b0=2)
    forms = [area_form(u) for u in model.ref_units]
    refs = [np.linalg.norm(np.diff(np.vstack([t, t[:1]]), axis=0), axis=1) for t in model.ref.tiles]
    hits = 0
    for cut, top in itertools.product(np.linspace(-5, 5, 201), np.linspace(-5, 5, 201)):
        c = [model.coefficients([cut, top], w) for w in range(2)]
        if forms[0](c[0]) > 0 and forms[1](c[1]) > 0:
            if same_cone(c[0], refs[0], forms[0]) and same_cone(c[1], -refs[1], forms[1]):
                hits += 1
    assert hits == 0
    assert find_sector_point(sq2(), [1, -1]) is None
    assert find_sector_point(sq2(), [-1, 1]) is None


def test_find_sector_point_all_positive_is_the_reference(models):
    for model in models.values():
        x = find_sector_point(model, np.ones(model.graph.n_whites))
        np.testing.assert_array_equal(x, model.x_ref)


def test_tri4_sector_points(models):
    model = models["TRI4"]
    found = {}
    for s in itertools.product((1, -1), repeat=4):
        found[s] = find_sector_point(model, s)
        if found[s] is not None:
            assert homology_tiles(model, found[s]).orientations.tolist() == list(s)
    assert sum(v is not None for v in found.values()) == 8
    assert all(found[s] is not None or found[tuple(-np.array(s))] is not None for s in found)


def test_solve_at_reference_areas(models):
    for model in models.values():
        h = solve_homology(model, model.ref.tile_areas())
        np.testing.assert_allclose(h.x, model.x_ref, atol=1e-10)
        assert h.iterations == 0


def test_sq2_closed_form():
    h = solve_homology(sq2(), [0.3, 0.7])
    assert h.intercepts == pytest.approx({4: 0.3}, abs=1e-12)


def test_pin5_matches_psi_inverse():
    target = [2.2, 1.8, 2.1, 1.9, 1.0]
    h = solve_homology(pin5(), target)
    np.testing.assert_allclose(h.q, target, atol=1e-8)
    inv = psi_inverse(InterceptModel(pin5()), target)
    # the free boundary segment stays put because the areas add up to the region's
    assert inv.intercepts[0] == pytest.approx(0.0, abs=1e-9)
    for b, v in h.intercepts.items():
        assert v == pytest.approx(inv.intercepts[b], abs=1e-8)


@pytest.mark.parametrize("name", QUAD_FIXTURES)
def test_random_areas_reach_a_critical_point(models, name, rng):
    model = models[name]
    for _ in range(10):
        areas = random_areas(rng, model.ref)
        h = solve_homology(model, areas)
        assert h.area_error <= 1e-8 and h.criticality <= 1e-9
        assert h.winding_ok


def objective(model, areas, x):
    return float(areas @ np.log(model.psi(x)))


@pytest.mark.parametrize("name", QUAD_FIXTURES)
def test_objective_is_concave_in_the_sector(models, name, rng):
    model = models[name]
    sigma = np.ones(model.graph.n_whites)
    areas = random_areas(rng, model.ref)
    pts = random_homology_starts(model, sigma, 40, seed=3)
    checked = 0
    for _ in range(100):
        i, j = rng.choice(len(pts), 2, replace=False)
        a, b = pts[i], pts[j]
        mid = 0.5 * (a + b)
        # the sector is convex, so the midpoint is feasible
        assert homology_tiles(model, mid, check=False).orientations.tolist() == list(sigma)
        second = objective(model, areas, a) - 2 * objective(model, areas, mid) + objective(model, areas, b)
        assert second <= 1e-9
        checked += 1
    assert checked == 100


def test_multistart_uniqueness(models):
    model = models["TRI4"]
    areas = np.array([0.1, 0.2, 0.25, 0.35])
    areas *= model.ref.area() / areas.sum()
    for sigma in ([1, 1, 1, 1], [1, -1, 1, 1]):
        if find_sector_point(model, sigma) is None:
            sigma = [-s for s in sigma]
        starts = random_homology_starts(model, sigma, 10, seed=11)
        sols = np.array([solve_homology(model, areas, sigma, x0).x for x0 in starts])
        assert np.ptp(sols, axis=0).max() <= 1e-6


def test_solve_errors(models):
    model = models["SQ2"]
    with pytest.raises(InvalidInputError):
        solve_homology(model, [0.5, 0.6])
    with pytest.raises(InvalidInputError):
        solve_homology(model, [1.2, -0.2])
    with pytest.raises(InfeasibleStartError):
        solve_homology(model, [0.3, 0.7], sigma=[1, -1])
    with pytest.raises(InfeasibleStartError):
        solve_homology(model, [0.3, 0.7], x0=[2.0])
    with pytest.raises(InvalidInputError):
        homology_model(InterceptModel(sq2()))


def test_reflection_reverses_orientations(models):
    h = homology_tiles(models["PIN5"], models["PIN5"].x_ref)
    r = h.reflected()
    assert list(r.orientations) == [-1] * 5
    np.testing.assert_allclose(r.q, h.q)
    np.testing.assert_allclose(r.region, -h.region)


def test_sq2_sweep():
    sweep = enumerate_sectors(sq2(), [0.3, 0.7])
    status = {sigma_str(r.sigma): (r.status, r.region) for r in sweep.reports}
    assert status == {"++": ("solved", "R"), "+-": ("empty", None), "-+": ("empty", None),
                      "--": ("solved", "-R")}
    (pp,) = [r for r in sweep.reports if r.region == "R"]
    assert pp.solution.intercepts == pytest.approx({4: 0.3})
    assert sweep.pairs_consistent


def test_tri4_sweep_solves_every_sector(models, rng):
    sweep = enumerate_sectors(models["TRI4"], random_areas(rng, models["TRI4"].ref))
    assert len(sweep.solved) == 16
    assert sum(r.region == "R" for r in sweep.reports) == 8
    assert sweep.pairs_consistent
    assert sweep.seconds < 60


def test_rectangle_fixtures_solve_fewer_sectors(models):
    for name in ("SQ2", "SQ3", "PIN5"):
        model = models[name]
        sweep = enumerate_sectors(model, model.ref.tile_areas())
        assert len(sweep.solved) < 2 ** model.graph.n_whites


def test_sweep_size_guard():
    strip = Tiling([(0, 0), (17, 0), (17, 1), (0, 1)], [rect(i, 0, i + 1, 1) for i in range(17)])
    with pytest.raises(TooLargeError):
        enumerate_sectors(strip, np.ones(17))


@given(st.lists(st.sampled_from("+-"), min_size=1, max_size=8))
def test_sigma_strings_round_trip(chars):
    text = "".join(chars)
    assert sigma_str(parse_sigma(text)) == text


def test_parse_sigma_rejects_other_characters():
    with pytest.raises(InvalidInputError):
        parse_sigma("+x-")
