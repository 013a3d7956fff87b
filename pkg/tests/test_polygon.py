import math

import numpy as np
import pytest

from models.polygon import (Polygon, Reflection, Rotation, Scaling, Translation, check_vertices,
                            diagonal_angles, distance_to_regular, half_angle_cot, psi, regular_ngon,
                            regular_side_length, shape_deviation, shape_signature, transform)
from utils.errors import DomainError, InvalidArgumentError, InvalidPolygonError

from tests.conftest import UNIT_SQUARE


def test_unit_square_geometry(unit_square):
    assert unit_square.n == 4
    assert unit_square.area == 1.0
    assert unit_square.perimeter == 4.0
    assert np.allclose(unit_square.interior_angles, math.pi / 2)
    assert np.allclose(unit_square.centroid, [0.5, 0.5])
    assert math.isclose(unit_square.diameter, math.sqrt(2))
    assert unit_square.is_convex


def test_normals_point_outward(unit_square):
    assert np.allclose(unit_square.normals, [[0, -1], [1, 0], [0, 1], [-1, 0]])
    offsets = [side.offset for side in unit_square.sides()]
    assert offsets == pytest.approx([0.0, 1.0, 1.0, 0.0])


def test_side_data_carries_adjacent_angles(scalene):
    side = scalene.side(1)
    assert side.index == 1
    assert np.allclose(side.start, [1.7, 0.0])
    assert np.allclose(side.end, [0.5, 1.1])
    assert side.theta_start == pytest.approx(scalene.interior_angles[1])
    assert side.theta_end == pytest.approx(scalene.interior_angles[2])
    assert math.isclose(side.length, math.hypot(1.2, 1.1))


def test_interior_angles_sum(scalene, rhombus, arrowhead):
    for polygon in (scalene, rhombus, arrowhead):
        assert math.isclose(polygon.interior_angles.sum(), (polygon.n - 2) * math.pi)


def test_reflex_vertex_is_detected(arrowhead):
    assert not arrowhead.is_convex
    assert arrowhead.interior_angles[3] > math.pi


@pytest.mark.parametrize("vertices, fragment", [
    ([[0, 0], [1, 0]], "at least 3"),
    ([[0, 0], [1, 0], [1, 0], [0, 1]], "coincide"),
    ([[0, 0], [1, 0], [2, 0]], "zero area"),
    ([[0, 0], [2, 0], [0, 1], [1, 1]], "self-intersects"),
    ([[0, 0], [0, 1], [1, 0]], "clockwise"),
    ([[0, 0], [1, 0], [2, 0], [1, 1]], "degenerate"),
    ([[0, 0], [1, float("nan")], [0, 1]], "finite"),
])
def test_invalid_vertex_lists_are_rejected(vertices, fragment):
    ok, message = check_vertices(vertices)
    assert not ok
    assert fragment in message
    with pytest.raises(InvalidPolygonError):
        Polygon(vertices)


def test_clockwise_input_can_be_reoriented():
    polygon = Polygon(UNIT_SQUARE[::-1], reorient=True)
    assert polygon.area == pytest.approx(1.0)
    assert np.allclose(polygon.vertex(0), UNIT_SQUARE[-1])


def test_vertices_are_immutable(unit_square):
    with pytest.raises(ValueError):
        unit_square.vertices[0, 0] = 5.0


def test_from_dict_requires_vertices():
    with pytest.raises(InvalidPolygonError):
        Polygon.from_dict({"points": UNIT_SQUARE})
    assert Polygon.from_dict({"vertices": UNIT_SQUARE}).to_dict() == {"vertices": UNIT_SQUARE}


@pytest.mark.parametrize("n", [3, 4, 5, 8])
def test_regular_ngon_has_requested_area(n):
    polygon = regular_ngon(n, 2.5)
    assert polygon.area == pytest.approx(2.5)
    assert np.allclose(polygon.side_lengths, regular_side_length(n, 2.5))
    assert shape_deviation(polygon) == pytest.approx((0.0, 0.0), abs=1e-12)
    assert distance_to_regular(polygon) < 1e-12


def test_regular_ngon_validates_arguments():
    with pytest.raises(InvalidArgumentError):
        regular_ngon(2, 1.0)
    with pytest.raises(InvalidArgumentError):
        regular_ngon(4, -1.0)


def test_psi_matches_half_angle_cot():
    for theta in (0.3, 1.0, math.pi / 2, 2.9):
        assert psi(theta) == pytest.approx(half_angle_cot(theta))
    assert half_angle_cot(4.0) < 0
    with pytest.raises(DomainError):
        psi(math.pi)
    with pytest.raises(DomainError):
        half_angle_cot(2 * math.pi)


@pytest.mark.parametrize("motion", [
    Translation((0.3, -1.2)),
    Rotation(0.7, (0.2, 0.1)),
    Reflection((1.0, 2.0), (0.5, 0.0)),
])
def test_rigid_motions_preserve_shape(scalene, motion):
    moved = transform(scalene, motion)
    assert moved.area == pytest.approx(scalene.area)
    before, after = shape_signature(scalene), shape_signature(moved)
    assert after["sides"] == pytest.approx(before["sides"])
    assert after["angles"] == pytest.approx(before["angles"])


def test_reflection_keeps_first_vertex_and_orientation(scalene):
    mirrored = transform(scalene, Reflection((0.0, 1.0)))
    assert np.allclose(mirrored.vertex(0), [0.0, 0.0])
    assert mirrored.area > 0


def test_scaling_multiplies_area(scalene):
    scaled = transform(scalene, Scaling(3.0, tuple(scalene.centroid)))
    assert scaled.area == pytest.approx(9.0 * scalene.area)
    assert np.allclose(scaled.centroid, scalene.centroid)
    with pytest.raises(InvalidArgumentError):
        transform(scalene, Scaling(0.0))


def test_diagonal_angles_of_equilateral_triangle(equilateral):
    alpha_minus, alpha_plus = diagonal_angles(equilateral, 1)
    assert alpha_minus == pytest.approx(math.pi / 3)
    assert alpha_plus == pytest.approx(math.pi / 3)


def test_distance_to_regular_detects_elongation(rectangle):
    assert distance_to_regular(rectangle) > 0.1
    side_dev, angle_dev = shape_deviation(rectangle)
    assert side_dev > 0.4
    assert angle_dev == pytest.approx(0.0, abs=1e-12)
