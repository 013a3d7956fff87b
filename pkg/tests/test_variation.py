import numpy as np
import pytest

from models.energy import energy
from models.flows import Constraint, FlowFamily, FlowSpec, quad_case_betas
from models.kernel import RegularizedRieszKernel, RieszKernel
from models.polygon import Polygon, regular_ngon
from models.variation import (VariationAnalyzer, analytic_first_variation, horizontal_slice,
                              richardson_first_variation, slice_derivative_bound_check, vertex_gradient)
from utils.errors import DomainError, InvalidArgumentError

from tests.conftest import CASE_I, CASE_II, random_convex_polygon


def _assert_agrees(analyzer, flow, h=1e-3):
    analytic = analyzer.analytic_first_variation(flow)
    fd = analyzer.richardson_first_variation(flow, h)
    slack = max(5e-4 * abs(analytic.value), 3.0 * (analytic.error + fd.error), 1e-7)
    assert abs(analytic.value - fd.value) <= slack, (flow.describe(), analytic, fd)


@pytest.mark.parametrize("constraint", list(Constraint))
@pytest.mark.parametrize("family", [FlowFamily.SLIDING, FlowFamily.TILTING, FlowFamily.DIAGONAL_VERTEX])
def test_triangle_first_variation_matches_finite_differences(scalene, regularized, spec, family, constraint):
    analyzer = VariationAnalyzer(scalene, regularized, spec)
    _assert_agrees(analyzer, FlowSpec(family, 1, constraint))


@pytest.mark.parametrize("polygon", [CASE_I, CASE_II])
def test_quad_first_variation_matches_finite_differences(polygon, regularized, spec):
    analyzer = VariationAnalyzer(polygon, regularized, spec)
    for constraint in (Constraint.NONE, Constraint.PERIMETER):
        _assert_agrees(analyzer, FlowSpec(FlowFamily.QUAD_TWO_SIDED, 0, constraint))


def test_nonconvex_polygon_first_variation(arrowhead, regularized, spec):
    analyzer = VariationAnalyzer(arrowhead, regularized, spec)
    for flow in (FlowSpec(FlowFamily.SLIDING, 2), FlowSpec(FlowFamily.TILTING, 3, Constraint.AREA),
                 FlowSpec(FlowFamily.DIAGONAL_VERTEX, 1)):
        _assert_agrees(analyzer, flow)


@pytest.mark.slow
def test_random_polygons_all_flows(regularized, spec, rng):
    for n in (3, 4, 5, 4, 3, 5, 4, 3, 5, 4):
        polygon = random_convex_polygon(rng, n)
        analyzer = VariationAnalyzer(polygon, regularized, spec)
        for i in range(n):
            for family in (FlowFamily.SLIDING, FlowFamily.TILTING, FlowFamily.DIAGONAL_VERTEX):
                for constraint in Constraint:
                    _assert_agrees(analyzer, FlowSpec(family, i, constraint))


def test_riesz_first_variation_is_close_to_finite_differences(scalene, riesz, spec):
    flow = FlowSpec(FlowFamily.SLIDING, 0)
    analytic = analytic_first_variation(scalene, riesz, flow, spec)
    fd = richardson_first_variation(scalene, riesz, flow, 1e-3, spec)
    assert analytic.value == pytest.approx(fd.value, rel=1e-3)


def test_sliding_first_variation_is_twice_the_side_integral(scalene, regularized, spec):
    analyzer = VariationAnalyzer(scalene, regularized, spec)
    raw = analyzer.raw_first_variation(FlowSpec(FlowFamily.SLIDING, 2))
    assert raw.value == pytest.approx(2.0 * analyzer.stationarity.sides[2].total.value)


def test_vertex_gradient_matches_central_differences(scalene, regularized, spec):
    gradient = vertex_gradient(scalene, regularized, spec)
    h = 1e-3
    for j in range(scalene.n):
        for axis in range(2):
            bump = np.zeros_like(scalene.vertices)
            bump[j, axis] = h
            plus = energy(Polygon(scalene.vertices + bump), regularized, spec).value
            minus = energy(Polygon(scalene.vertices - bump), regularized, spec).value
            numeric = (plus - minus) / (2 * h)
            assert gradient[j, axis] == pytest.approx(numeric, rel=5e-4, abs=5e-5)


def test_projected_gradient_vanishes_at_regular_polygon(riesz, spec):
    analyzer = VariationAnalyzer(regular_ngon(5, 1.0), riesz, spec)
    assert np.abs(analyzer.projected_gradient()).max() < 1e-6
    gradient, errors = analyzer.vertex_gradient()
    assert np.abs(gradient).max() > 0.1
    assert np.all(errors < 1e-6)


def test_fd_step_must_be_positive(scalene, riesz, light_spec):
    with pytest.raises(InvalidArgumentError):
        VariationAnalyzer(scalene, riesz, light_spec).fd_first_variation(FlowSpec(FlowFamily.SLIDING, 0), 0.0)


def test_compare_reports_both_sides(scalene, regularized, spec):
    result = VariationAnalyzer(scalene, regularized, spec).compare(FlowSpec(FlowFamily.SLIDING, 0))
    assert result["flow"] == {"family": "sliding", "constraint": "none", "side": 1}
    assert result["fd_step"] == 1e-3
    assert result["abs_difference"] == pytest.approx(
        abs(result["analytic"]["value"] - result["finite_difference"]["value"]))
    assert result["rel_difference"] < 5e-4


def test_symmetrizing_flows_increase_energy(regularized, spec):
    leaning = Polygon([[-1.0, 0.0], [1.0, 0.0], [0.4, 1.3]])
    analyzer = VariationAnalyzer(leaning, regularized, spec)
    # vertex 2 moves along P0 - P1, toward the axis of the base
    value = analyzer.analytic_first_variation(FlowSpec(FlowFamily.DIAGONAL_VERTEX, 2))
    assert value.value > 3.0 * value.error
    for polygon in (CASE_I, CASE_II):
        quad = VariationAnalyzer(polygon, regularized, spec)
        value = quad.analytic_first_variation(FlowSpec(FlowFamily.QUAD_TWO_SIDED, 0))
        assert value.value > 3.0 * value.error


@pytest.mark.slow
def test_symmetrizing_flows_increase_energy_on_random_shapes(riesz, regularized, spec, rng):
    for _ in range(10):
        apex = (rng.uniform(0.1, 0.9), rng.uniform(0.5, 2.0))
        triangle = Polygon([[-1.0, 0.0], [1.0, 0.0], apex])
        value = VariationAnalyzer(triangle, riesz, spec).analytic_first_variation(
            FlowSpec(FlowFamily.DIAGONAL_VERTEX, 2))
        assert value.value > 3.0 * value.error
    for case in ["i", "ii"] * 5:
        # diagonal P1P3 on the x1 axis; P2 below it leans toward P1
        upper = (rng.uniform(-0.8, -0.1), -rng.uniform(0.4, 1.5))
        lower_x = rng.uniform(0.1, 0.8) * (1.0 if case == "i" else -1.0)
        quad = Polygon([[-1.0, 0.0], upper, [1.0, 0.0], (lower_x, rng.uniform(0.4, 1.5))])
        assert quad_case_betas(quad)[2] == case
        value = VariationAnalyzer(quad, regularized, spec).analytic_first_variation(
            FlowSpec(FlowFamily.QUAD_TWO_SIDED, 0))
        assert value.value > 3.0 * value.error


def test_quad_default_betas_are_used(regularized, spec):
    beta_plus, beta_minus, _ = quad_case_betas(CASE_II)
    analyzer = VariationAnalyzer(CASE_II, regularized, spec)
    implicit = analyzer.analytic_first_variation(FlowSpec(FlowFamily.QUAD_TWO_SIDED, 0))
    explicit = analyzer.analytic_first_variation(
        FlowSpec(FlowFamily.QUAD_TWO_SIDED, 0, beta_plus=beta_plus, beta_minus=beta_minus))
    assert implicit.value == pytest.approx(explicit.value)


def test_horizontal_slice():
    triangle = Polygon([[-1.0, 0.0], [1.0, 0.0], [0.5, 2.0]])
    center, half = horizontal_slice(triangle, 1.0)
    assert center == pytest.approx(0.25)
    assert half == pytest.approx(0.5)
    with pytest.raises(DomainError):
        horizontal_slice(triangle, 3.0)


@pytest.mark.parametrize("apex_x", [-0.6, -0.2])
def test_slice_bound_holds(apex_x, riesz, rng):
    triangle = Polygon([[-1.0, 0.0], [1.0, 0.0], [apex_x, 1.2]])
    for _ in range(10):
        x2, y2 = sorted(rng.uniform(0.05, 1.15, size=2))
        lhs, rhs = slice_derivative_bound_check(triangle, riesz, x2, y2)
        assert rhs >= 0.0
        assert lhs >= rhs - 1e-12
        lhs, rhs = slice_derivative_bound_check(triangle, riesz, y2, x2)
        assert lhs >= rhs - 1e-12


@pytest.mark.slow
@pytest.mark.parametrize("kernel", [RieszKernel(1.0), RegularizedRieszKernel(1.0, 0.05)])
@pytest.mark.parametrize("vertices,top", [
    ([[-1.0, 0.0], [1.0, 0.0], [-0.6, 1.2]], 1.2),
    ([[-1.0, 0.0], [1.0, 0.0], [-0.15, 0.7]], 0.7),
    # quadrilaterals: only the half above the diagonal P1P3
    ([[-1.0, 0.0], [0.4, -0.8], [1.0, 0.0], [-0.3, 1.0]], 1.0),
    ([[-1.0, 0.0], [-0.4, -0.8], [1.0, 0.0], [-0.5, 0.6]], 0.6),
])
def test_slice_bound_holds_for_many_pairs(vertices, top, kernel, rng):
    polygon = Polygon(vertices)
    for _ in range(50):
        x2, y2 = rng.uniform(0.02 * top, 0.98 * top, size=2)
        lhs, rhs = slice_derivative_bound_check(polygon, kernel, x2, y2)
        assert rhs >= 0.0
        assert lhs >= rhs - 1e-12


def test_slice_bound_isosceles_is_flat(riesz):
    triangle = Polygon([[-1.0, 0.0], [1.0, 0.0], [0.0, 1.2]])
    lhs, rhs = slice_derivative_bound_check(triangle, riesz, 0.3, 0.8)
    assert lhs == pytest.approx(0.0, abs=1e-10)
    assert rhs == 0.0
    assert slice_derivative_bound_check(triangle, riesz, 0.5, 0.5) == (0.0, 0.0)


def test_slice_bound_needs_convex_polygon(arrowhead, riesz):
    with pytest.raises(InvalidArgumentError):
        slice_derivative_bound_check(arrowhead, riesz, 0.2, 0.4)


def test_area_constrained_sliding_of_a_triangle_vanishes(scalene, regularized, spec):
    analyzer = VariationAnalyzer(scalene, regularized, spec)
    for i in range(3):
        value = analyzer.analytic_first_variation(FlowSpec(FlowFamily.SLIDING, i, Constraint.AREA))
        assert abs(value.value) < 1e-6
