import math

import numpy as np
import pytest

from utils.errors import InvalidArgumentError
from utils.quadrature import AdaptiveGaussLegendre, Estimate, gauss_legendre, hp_rule


def test_gauss_legendre_is_exact_for_polynomials():
    x, w = gauss_legendre(5)
    # exact up to degree 9
    assert math.isclose((w * x ** 8).sum(), 2.0 / 9.0, rel_tol=1e-14)
    assert abs((w * x ** 9).sum()) < 1e-15
    assert math.isclose(w.sum(), 2.0, rel_tol=1e-15)


def test_gauss_legendre_rejects_nonpositive_order():
    with pytest.raises(InvalidArgumentError):
        gauss_legendre(0)


@pytest.mark.parametrize("end", ["left", "right", "both"])
def test_hp_rule_nodes_lie_inside_unit_interval(end):
    x, w = hp_rule(12, 8, 0.2, end)
    assert np.all(x > 0.0) and np.all(x < 1.0)
    assert np.all(np.diff(x) > 0)
    assert math.isclose(w.sum(), 1.0, rel_tol=1e-14)


def test_hp_rule_resolves_endpoint_singularity():
    x, w = hp_rule(16, 20, 0.2, "left")
    # int_0^1 x^(-1/2) dx = 2
    assert math.isclose((w / np.sqrt(x)).sum(), 2.0, rel_tol=1e-6)
    x, w = hp_rule(16, 20, 0.2, "right")
    assert math.isclose((w * np.log(1.0 - x)).sum(), -1.0, rel_tol=1e-9)


def test_hp_rule_validates_arguments():
    with pytest.raises(InvalidArgumentError):
        hp_rule(8, 4, 1.5)
    with pytest.raises(InvalidArgumentError):
        hp_rule(8, 4, 0.2, "middle")


def test_adaptive_integrator_handles_a_batch():
    integrator = AdaptiveGaussLegendre(nodes=16, max_depth=20)
    freq = np.array([1.0, 10.0, 40.0])

    def f(t, rows):
        return np.cos(freq[rows][:, None] * t)

    result = integrator.integrate(f, np.zeros(3), np.full(3, math.pi / 2), np.full(3, 1e-12))
    expected = np.sin(freq * math.pi / 2) / freq
    assert np.allclose(result.values, expected, atol=1e-11)
    assert result.converged.all()
    assert np.all(result.errors <= 1e-11)


def test_adaptive_integrator_reports_nonconvergence():
    integrator = AdaptiveGaussLegendre(nodes=4, max_depth=1)
    result = integrator.integrate(lambda t, rows: 1.0 / np.sqrt(t), np.array([0.0]), np.array([1.0]),
                                  np.array([1e-14]))
    assert not result.converged[0]


def test_adaptive_integrator_skips_empty_intervals():
    integrator = AdaptiveGaussLegendre()
    result = integrator.integrate(lambda t, rows: t, np.array([1.0]), np.array([1.0]), np.array([1e-10]))
    assert result.values[0] == 0.0
    assert result.converged[0]


def test_estimate_propagates_error_linearly():
    a, b = Estimate(1.0, 0.1), Estimate(2.0, 0.2)
    total = a + b
    assert total.value == 3.0 and math.isclose(total.error, 0.3)
    diff = a - b
    assert diff.value == -1.0 and math.isclose(diff.error, 0.3)
    scaled = -2.0 * a
    assert scaled.value == -2.0 and scaled.error == 0.2
    value, error = Estimate.fsum([a, b, a])
    assert value == 4.0 and math.isclose(error, 0.4)
    assert (1.0 - a).as_dict() == {"value": 0.0, "error": 0.1}
