import math

import numpy as np
import pytest

from models.polygon import Polygon, Reflection, shape_signature, transform
from models.steiner import interior_diagonal, steiner_symmetrize, symmetrize_interior_diagonal
from utils.errors import InvalidArgumentError, UnsupportedInputError


def _is_symmetric(polygon: Polygon, direction) -> bool:
    """Mirror-invariant across the line through the centroid perpendicular to ``direction``."""
    d = np.asarray(direction, dtype=float)
    axis = (d[1], -d[0])
    mirrored = transform(polygon, Reflection(axis, tuple(polygon.centroid)))
    return mirrored.to_shapely().symmetric_difference(polygon.to_shapely()).area < 1e-10


@pytest.mark.parametrize("direction", [(1.0, 0.0), (0.3, 1.0), (-1.0, 2.5)])
def test_symmetral_preserves_area_and_is_symmetric(scalene, direction):
    result = steiner_symmetrize(scalene, direction)
    assert result.area == pytest.approx(scalene.area, rel=1e-12)
    assert result.is_convex
    assert _is_symmetric(result, direction)


def test_triangle_along_a_side_gives_isosceles(scalene):
    result = steiner_symmetrize(scalene, scalene.edges[0])
    assert result.n == 3
    sides = sorted(result.side_lengths)
    assert any(math.isclose(a, b, rel_tol=1e-12) for a, b in zip(sides, sides[1:]))


def test_symmetric_input_is_a_fixed_shape(unit_square):
    result = steiner_symmetrize(unit_square, (0.0, 1.0))
    assert shape_signature(result)["sides"] == pytest.approx([1.0] * 4)


def test_nonconvex_input_is_unsupported(arrowhead):
    with pytest.raises(UnsupportedInputError):
        steiner_symmetrize(arrowhead, (1.0, 0.0))


def test_zero_direction_is_rejected(scalene):
    with pytest.raises(InvalidArgumentError):
        steiner_symmetrize(scalene, (0.0, 0.0))


def test_interior_diagonal(rhombus, arrowhead):
    assert interior_diagonal(rhombus) == (0, 2)
    assert interior_diagonal(arrowhead) == (1, 3)


def test_interior_diagonal_needs_quadrilateral(scalene):
    with pytest.raises(UnsupportedInputError):
        interior_diagonal(scalene)


def test_nonconvex_quadrilateral_becomes_convex_kite(arrowhead):
    kite = symmetrize_interior_diagonal(arrowhead)
    assert kite.n == 4
    assert kite.is_convex
    assert kite.area == pytest.approx(arrowhead.area, rel=1e-12)
    a, b = interior_diagonal(arrowhead)
    assert _is_symmetric(kite, arrowhead.vertex(b) - arrowhead.vertex(a))
