import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tgraph.errors import (
    DegenerateDirectionsError,
    InvalidInputError,
    NotInConeError,
    ParallelLinesError,
)
from tgraph.geom import (
    Direction,
    Line,
    TileShape,
    area_form,
    convex_overlap_depth,
    is_convex,
    normalize_polygon,
    same_cone,
    signed_area,
    winding_number,
)

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def random_convex_polygon(rng, n):
    """n points on an ellipse at sorted random angles: strictly convex."""
    while True:
        ang = np.sort(rng.uniform(0, 2 * math.pi, n))
        gaps = np.diff(np.append(ang, ang[0] + 2 * math.pi))
        if gaps.min() > 0.05 and gaps.max() < math.pi - 0.05:
            break
    a, b = rng.uniform(0.5, 2, 2)
    return np.column_stack([a * np.cos(ang), b * np.sin(ang)]) + rng.normal(size=2)


def test_signed_area_examples():
    assert signed_area(SQUARE) == 1.0
    assert signed_area(SQUARE[::-1]) == -1.0
    assert signed_area([(0, 0), (2, 0), (0, 3)]) == 3.0


def test_signed_area_needs_three_points():
    with pytest.raises(InvalidInputError):
        signed_area([(0, 0), (1, 0)])


@given(st.integers(3, 9), st.integers(0, 10_000), st.floats(-50, 50), st.floats(-50, 50))
def test_signed_area_translation_and_reversal(n, seed, dx, dy):
    poly = random_convex_polygon(np.random.default_rng(seed), n)
    a = signed_area(poly)
    assert a > 0
    assert math.isclose(signed_area(poly + [dx, dy]), a, rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose(signed_area(poly[::-1]), -a, rel_tol=1e-12)


@given(st.integers(4, 9), st.integers(0, 10_000))
def test_signed_area_additive_under_fan_subdivision(n, seed):
    poly = random_convex_polygon(np.random.default_rng(seed), n)
    parts = sum(signed_area([poly[0], poly[k], poly[k + 1]]) for k in range(1, n - 1))
    assert math.isclose(parts, signed_area(poly), rel_tol=1e-12)


def test_intersect_examples():
    from tgraph.geom import intersect

    np.testing.assert_allclose(intersect(Line(Direction(0), 0), Line(Direction(math.pi / 2), 0)), [0, 0],
                               atol=1e-15)
    np.testing.assert_allclose(intersect(Line(Direction(0), 2), Line(Direction(math.pi / 2), -3)), [3, 2])
    with pytest.raises(ParallelLinesError):
        intersect(Line(Direction(0), 1), Line(Direction(0), 2))


def test_direction_reduced_mod_pi():
    d = Direction(math.pi + 0.3)
    assert math.isclose(d.theta, 0.3)
    assert Direction(-0.2).same_as(Direction(math.pi - 0.2))
    np.testing.assert_allclose(Direction(0.0).normal, [0, 1])


def test_line_through_points_contains_them():
    line = Line.through((1, 2), (4, -1))
    assert line.contains((1, 2)) and line.contains((4, -1)) and line.contains((7, -4))
    assert not line.contains((0, 0))


def test_normalize_polygon_removes_collinear_and_orients():
    poly = normalize_polygon([(0, 1), (1, 1), (1, 0), (0.5, 0), (0, 0)])
    assert len(poly) == 4 and signed_area(poly) == 1.0


def test_convexity_and_overlap():
    assert is_convex(SQUARE)
    assert not is_convex([(0, 0), (2, 0), (1, 0.2), (1, 2)])
    shifted = np.array(SQUARE) + [0.5, 0]
    assert math.isclose(convex_overlap_depth(SQUARE, shifted), 0.5)
    assert convex_overlap_depth(SQUARE, np.array(SQUARE) + [1, 0]) <= 0


def test_winding_number():
    assert winding_number(SQUARE, (0.5, 0.5)) == 1
    assert winding_number(SQUARE[::-1], (0.5, 0.5)) == -1
    assert winding_number(SQUARE, (1.5, 0.5)) == 0


def test_rectangle_area_form():
    shape = TileShape.from_polygon([(0, 0), (2, 0), (2, 3), (0, 3)])
    form = area_form(shape)
    assert form.dimension == 2
    assert form.signature() == (1, 1)
    assert math.isclose(form(shape.coefficients), 6.0)


def test_triangle_area_form_is_definite():
    form = area_form(TileShape.from_polygon([(0, 0), (1, 0), (0, 1)]))
    assert form.dimension == 1 and form.signature() == (1, 0)
    v = form.basis[:, 0]
    assert form(v) > 0 and form(-3 * v) > 0


def test_regular_hexagon_signature():
    ang = np.arange(6) * math.pi / 3
    hexagon = np.column_stack([np.cos(ang), np.sin(ang)])
    form = area_form(TileShape.from_polygon(hexagon))
    vals = np.linalg.eigvalsh(form.matrix)
    assert (vals > 0).sum() == 1 and (vals < 0).sum() == 3


def test_parallel_consecutive_directions_rejected():
    with pytest.raises(DegenerateDirectionsError):
        area_form(np.array([[1.0, 0], [1.0, 0], [0, 1.0], [-1.0, -1.0]]))


@given(st.integers(3, 8), st.integers(0, 10_000))
def test_area_form_matches_shoelace(n, seed):
    poly = random_convex_polygon(np.random.default_rng(seed), n)
    shape = TileShape.from_polygon(poly)
    form = area_form(shape)
    assert math.isclose(form(shape.coefficients), signed_area(poly), rel_tol=1e-12)
    assert shape.orientation == 1
    assert form.signature() == (1, n - 3)


@given(st.integers(3, 8), st.integers(0, 10_000))
def test_area_form_on_closed_paths(n, seed):
    """Any closure-subspace vector, not only convex ones."""
    rng = np.random.default_rng(seed)
    shape = TileShape.from_polygon(random_convex_polygon(rng, n))
    form = area_form(shape)
    a = form.basis @ rng.normal(size=form.dimension)
    path = TileShape(shape.directions, a).vertices()
    assert math.isclose(form(a), signed_area(path), rel_tol=1e-9, abs_tol=1e-12)
    np.testing.assert_allclose(form.basis.T @ form.basis, np.eye(form.dimension), atol=1e-12)


def test_same_cone_examples(rng):
    quad = random_convex_polygon(rng, 4)
    shape = TileShape.from_polygon(quad)
    form = area_form(shape)
    x = shape.coefficients
    assert same_cone(x, x, form)
    assert not same_cone(x, -x, form)
    # another convex quadrilateral with the same directions
    y = x + 0.1 * (form.basis @ rng.normal(size=2))
    assert np.all(y > 0)
    assert same_cone(x, y, form) == (form.polar(x, y) > 0) is True
    with pytest.raises(NotInConeError):
        same_cone(x, np.zeros_like(x), form)


@given(st.integers(4, 7), st.integers(0, 10_000))
def test_same_cone_has_two_classes(n, seed):
    rng = np.random.default_rng(seed)
    shape = TileShape.from_polygon(random_convex_polygon(rng, n))
    form = area_form(shape)
    ref = shape.coefficients
    pts = [form.basis @ rng.normal(size=form.dimension) for _ in range(40)]
    pts = [p for p in pts if form(p) > 1e-9]
    labels = [same_cone(p, ref, form) for p in pts]
    for p, lp in zip(pts, labels):
        for r, lr in zip(pts, labels):
            assert same_cone(p, r, form) == (lp == lr)


@given(st.integers(3, 7), st.integers(0, 10_000))
def test_cone_margin_terms_split_the_form(n, seed):
    rng = np.random.default_rng(seed)
    shape = TileShape.from_polygon(random_convex_polygon(rng, n))
    form = area_form(shape)
    t, s = form.cone_margin_terms(shape.coefficients)
    a = form.basis @ rng.normal(size=form.dimension)
    assert math.isclose(form(a), (t @ a) ** 2 - np.sum((s @ a) ** 2), rel_tol=1e-9, abs_tol=1e-12)
    c = shape.coefficients
    assert t @ c - np.linalg.norm(s @ c) > 0
