import math

import numpy as np
import pytest

from models.kernel import RegularizedRieszKernel, RieszKernel
from models.polygon import Polygon, regular_ngon
from models.schemas import QuadratureSpec

UNIT_SQUARE = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
SQUARE_ENERGY_ALPHA1 = 4.0 * math.asinh(1.0) + 4.0 / 3.0 * (1.0 - math.sqrt(2.0))
SQUARE_CENTRE_POTENTIAL_ALPHA1 = 4.0 * math.asinh(1.0)

# quadrilaterals in the frame of diagonal P1P3: upper vertex leaning left, lower vertex right (i) or left (ii)
CASE_I_VERTICES = [[-1.0, 0.0], [-0.3, -1.0], [1.0, 0.0], [0.4, 0.8]]
CASE_II_VERTICES = [[-1.0, 0.0], [-0.3, -1.0], [1.0, 0.0], [-0.4, 0.8]]
CASE_I = Polygon(CASE_I_VERTICES)
CASE_II = Polygon(CASE_II_VERTICES)


@pytest.fixture
def unit_square():
    return Polygon(UNIT_SQUARE)


@pytest.fixture
def equilateral():
    return regular_ngon(3, 1.0)


@pytest.fixture
def scalene():
    return Polygon([[0.0, 0.0], [1.7, 0.0], [0.5, 1.1]])


@pytest.fixture
def rectangle():
    return Polygon([[0.0, 0.0], [2.0, 0.0], [2.0, 0.5], [0.0, 0.5]])


@pytest.fixture
def rhombus():
    # side 1, acute angle 60 degrees
    return Polygon([[0.0, 0.0], [1.0, 0.0], [1.5, math.sqrt(3) / 2], [0.5, math.sqrt(3) / 2]])


@pytest.fixture
def arrowhead():
    """Nonconvex quadrilateral with a reflex angle at vertex 3."""
    return Polygon([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [0.6, 0.6]])


@pytest.fixture
def riesz():
    return RieszKernel(1.0)


@pytest.fixture
def regularized():
    return RegularizedRieszKernel(1.0, 0.05)


@pytest.fixture
def spec():
    return QuadratureSpec()


@pytest.fixture
def light_spec():
    return QuadratureSpec(tolerance=1e-6, line_nodes=32, outer_triangle_order=5, grading_levels=6,
                          max_refinements=4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_convex_polygon(rng, n: int, area: float = 1.0) -> Polygon:
    """Convex n-gon: vertices on an ellipse at jittered angles, scaled to ``area``."""
    while True:
        base = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        angles = base + rng.uniform(-0.35, 0.35, size=n) * 2.0 * math.pi / n
        a, b = rng.uniform(0.7, 1.3, size=2)
        v = np.column_stack([a * np.cos(angles), b * np.sin(angles)])
        try:
            polygon = Polygon(v)
        except ValueError:
            continue
        if polygon.is_convex and polygon.interior_angles.min() > 0.3:
            factor = math.sqrt(area / polygon.area)
            return Polygon(factor * v)


def random_triangle(rng, area: float = 1.0) -> Polygon:
    return random_convex_polygon(rng, 3, area)
