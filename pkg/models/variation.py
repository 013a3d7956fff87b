"""First variations of the energy along the perturbation flows.

Analytic values come from boundary integrals of the potential; the
finite-difference side re-evaluates E on the constraint-rescaled flow at
``+h`` and ``-h``.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from models.energy import energy
from models.flows import (Constraint, FlowFamily, FlowSpec, analytic_geometry_derivatives,
                          area_gradient, constrained_flow, flow_velocity)
from models.kernel import Kernel
from models.polygon import Polygon
from models.schemas import QuadratureSpec
from models.stationarity import StationarityAnalyzer
from utils.errors import DomainError, InvalidArgumentError
from utils.parallel import ChunkedExecutor
from utils.quadrature import Estimate

logger = logging.getLogger(__name__)

DEFAULT_FD_STEP = 1e-3
C_W_GRID = 256


class VariationAnalyzer:
    """Analytic and finite-difference derivatives of E(P_t) at t = 0."""

    def __init__(self, polygon: Polygon, kernel: Kernel, spec: Optional[QuadratureSpec] = None,
                 executor: Optional[ChunkedExecutor] = None):
        self.polygon = polygon
        self.kernel = kernel
        self.spec = spec or QuadratureSpec()
        self.executor = executor or ChunkedExecutor()
        self.stationarity = StationarityAnalyzer(polygon, kernel, self.spec, self.executor)
        self.logger = logging.getLogger(__name__)

    def vertex_gradient(self) -> Tuple[np.ndarray, np.ndarray]:
        """dE/dP_j as an (N, 2) array together with per-vertex error bounds."""
        polygon = self.polygon
        sides = self.stationarity.sides
        normals = polygon.normals
        gradient = np.zeros((polygon.n, 2))
        errors = np.zeros(polygon.n)
        for j in range(polygon.n):
            previous, current = sides[(j - 1) % polygon.n], sides[j]
            before = previous.start_moment / previous.length
            after = current.end_moment / current.length
            gradient[j] = 2.0 * (normals[(j - 1) % polygon.n] * before.value + normals[j] * after.value)
            errors[j] = 2.0 * (before.error + after.error)
        return gradient, errors

    def sigma_from_gradient(self) -> float:
        """sigma recovered as (1/2) sum_j P_j . dE/dP_j."""
        gradient, _ = self.vertex_gradient()
        return 0.5 * math.fsum((self.polygon.vertices * gradient).sum(axis=1))

    def projected_gradient(self) -> np.ndarray:
        """Ascent direction tangent to the area constraint: dE - (sigma/|P|) d|P|."""
        gradient, _ = self.vertex_gradient()
        sigma = self.stationarity.sigma().value
        return gradient - (sigma / self.polygon.area) * area_gradient(self.polygon)

    def raw_first_variation(self, flow: FlowSpec) -> Estimate:
        """dE(P_t)/dt at 0 without rescaling."""
        analyzer = self.stationarity
        i = flow.index
        if flow.family is FlowFamily.SLIDING:
            return analyzer.sides[i].total * 2.0
        if flow.family is FlowFamily.TILTING:
            side = analyzer.sides[i]
            return (side.first_half - side.second_half) * 2.0
        if flow.family is FlowFamily.DIAGONAL_VERTEX:
            return analyzer.diagonal_I(i)
        velocity = flow_velocity(self.polygon, flow)
        gradient, errors = self.vertex_gradient()
        speed = np.linalg.norm(velocity, axis=1)
        return Estimate(math.fsum((velocity * gradient).sum(axis=1)), math.fsum(speed * errors))

    def analytic_first_variation(self, flow: FlowSpec) -> Estimate:
        raw = self.raw_first_variation(flow)
        if flow.constraint is Constraint.NONE:
            return raw
        d_area, d_perimeter = analytic_geometry_derivatives(self.polygon, flow)
        sigma = self.stationarity.sigma()
        if flow.constraint is Constraint.AREA:
            return raw - sigma * (d_area / self.polygon.area)
        return raw - sigma * (2.0 * d_perimeter / self.polygon.perimeter)

    def fd_first_variation(self, flow: FlowSpec, h: float = DEFAULT_FD_STEP) -> Estimate:
        if h <= 0:
            raise InvalidArgumentError(f"Finite-difference step must be positive, got {h}")
        plus, minus = constrained_flow(self.polygon, flow, h), constrained_flow(self.polygon, flow, -h)
        e_plus, e_minus = self.executor.run_all([
            lambda: energy(plus, self.kernel, self.spec),
            lambda: energy(minus, self.kernel, self.spec),
        ])
        result = (e_plus - e_minus) / (2.0 * h)
        self.logger.debug(f"FD first variation {flow.describe()} h={h:g}: {result.value:.12g} +/- {result.error:.2g}")
        return result

    def richardson_first_variation(self, flow: FlowSpec, h: float = DEFAULT_FD_STEP) -> Estimate:
        """(4 D(h/2) - D(h)) / 3; the error adds |D(h/2) - D(h)| / 3 to the quadrature part."""
        coarse = self.fd_first_variation(flow, h)
        fine = self.fd_first_variation(flow, 0.5 * h)
        value = (4.0 * fine.value - coarse.value) / 3.0
        error = (4.0 * fine.error + coarse.error) / 3.0 + abs(fine.value - coarse.value) / 3.0
        return Estimate(value, error)

    def compare(self, flow: FlowSpec, h: float = DEFAULT_FD_STEP) -> dict:
        analytic = self.analytic_first_variation(flow)
        fd = self.richardson_first_variation(flow, h)
        difference = abs(analytic.value - fd.value)
        self.logger.info(f"Flow {flow.describe()}: analytic={analytic.value:.10g} fd={fd.value:.10g} "
                         f"diff={difference:.3g}")
        return {
            "flow": flow.describe(),
            "fd_step": h,
            "analytic": analytic.as_dict(),
            "finite_difference": fd.as_dict(),
            "abs_difference": difference,
            "rel_difference": difference / abs(analytic.value) if analytic.value else None,
        }


def analytic_first_variation(polygon: Polygon, kernel: Kernel, flow: FlowSpec,
                             spec: Optional[QuadratureSpec] = None) -> Estimate:
    return VariationAnalyzer(polygon, kernel, spec).analytic_first_variation(flow)


def fd_first_variation(polygon: Polygon, kernel: Kernel, flow: FlowSpec, h: float = DEFAULT_FD_STEP,
                       spec: Optional[QuadratureSpec] = None,
                       executor: Optional[ChunkedExecutor] = None) -> Estimate:
    return VariationAnalyzer(polygon, kernel, spec, executor).fd_first_variation(flow, h)


def richardson_first_variation(polygon: Polygon, kernel: Kernel, flow: FlowSpec,
                               h: float = DEFAULT_FD_STEP, spec: Optional[QuadratureSpec] = None,
                               executor: Optional[ChunkedExecutor] = None) -> Estimate:
    return VariationAnalyzer(polygon, kernel, spec, executor).richardson_first_variation(flow, h)


def vertex_gradient(polygon: Polygon, kernel: Kernel, spec: Optional[QuadratureSpec] = None) -> np.ndarray:
    gradient, _ = VariationAnalyzer(polygon, kernel, spec).vertex_gradient()
    return gradient


def horizontal_slice(polygon: Polygon, height: float) -> Tuple[float, float]:
    """Centre and half-length of the slice {x1 : (x1, height) in P} of a convex polygon."""
    v = polygon.vertices
    crossings = []
    for i in range(polygon.n):
        a, b = v[i], v[(i + 1) % polygon.n]
        lo, hi = sorted((a[1], b[1]))
        if a[1] == b[1] or not lo <= height <= hi:
            continue
        s = (height - a[1]) / (b[1] - a[1])
        crossings.append(a[0] + s * (b[0] - a[0]))
    if len(crossings) < 2 or max(crossings) - min(crossings) <= 0.0:
        raise DomainError(f"The slice at x2 = {height:g} is empty", height=height)
    left, right = min(crossings), max(crossings)
    return 0.5 * (left + right), 0.5 * (right - left)


def _min_abs_slope(W_prime, lo: float, hi: float) -> float:
    if hi <= lo:
        return abs(float(W_prime(lo)))
    grid = np.linspace(lo, hi, C_W_GRID)
    slopes = np.abs(np.array([W_prime(r) for r in grid]))
    k = int(np.argmin(slopes))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, C_W_GRID - 1)]
    refined = minimize_scalar(lambda r: abs(W_prime(r)), bounds=(a, b), method="bounded")
    return float(min(slopes[k], refined.fun))


def slice_derivative_bound_check(polygon: Polygon, kernel: Kernel, x2: float, y2: float) -> Tuple[float, float]:
    """Derivative of the interaction of two horizontal slices under the shear
    ``x1 -> x1 + t x2 / height``, and its lower bound
    ``C_W alpha min(r_x, r_y) |c_x - c_y| |x2 - y2|``.

    ``W(s) = K(sqrt(l^2 + s^2))`` with ``l = |x2 - y2|``; C_W is the smallest
    |W'| on ``[|c_x - c_y| / 2, |c_x - c_y| + r_x + r_y]``.
    """
    if not polygon.is_convex:
        raise InvalidArgumentError("Slice interactions need a convex polygon")
    c_x, r_x = horizontal_slice(polygon, x2)
    c_y, r_y = horizontal_slice(polygon, y2)
    ys = polygon.vertices[:, 1]
    alpha = 1.0 / float(ys.max() - ys.min())
    gap = abs(x2 - y2)
    if gap == 0.0:
        return 0.0, 0.0
    shift = c_x - c_y

    def W(s):
        return float(kernel.value(np.hypot(gap, s)))

    def W_prime(s):
        rho = math.hypot(gap, s)
        return float(kernel.derivative(rho)) * s / rho

    b, a = r_x + shift, -r_x + shift
    inner, _ = quad(lambda y1: W(b - y1) - W(a - y1), -r_y, r_y, limit=200, epsabs=1e-13, epsrel=1e-11)
    lhs = alpha * (x2 - y2) * inner

    distance = abs(shift)
    c_w = _min_abs_slope(W_prime, 0.5 * distance, distance + r_x + r_y)
    rhs = c_w * alpha * min(r_x, r_y) * distance * gap
    logger.debug(f"Slice pair ({x2:g}, {y2:g}): lhs={lhs:.6g} rhs={rhs:.6g}")
    return lhs, rhs
