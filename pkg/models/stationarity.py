"""Multiplier sigma, side residuals of the overdetermined conditions and the
diagonal first variations I_i."""
import logging
import math
from typing import List, Optional

from models.flows import Constraint
from models.kernel import Kernel
from models.polygon import Polygon, diagonal_angles, half_angle_cot
from models.potential import PotentialEvaluator, SideIntegrals
from models.schemas import (QuadratureSpec, SideResidual, StationarityReport, Verdict,
                            VertexResidual)
from utils.errors import InvalidArgumentError, UnsupportedInputError
from utils.parallel import ChunkedExecutor
from utils.quadrature import Estimate

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-6


def passes(residual: Estimate, tolerance: float) -> bool:
    return abs(residual.value) <= max(tolerance, 3.0 * residual.error)


def _constraint(constraint) -> Constraint:
    constraint = Constraint(constraint)
    if constraint is Constraint.NONE:
        raise InvalidArgumentError("Stationarity needs an 'area' or 'perimeter' constraint")
    return constraint


class StationarityAnalyzer:
    def __init__(self, polygon: Polygon, kernel: Kernel, spec: Optional[QuadratureSpec] = None,
                 executor: Optional[ChunkedExecutor] = None):
        self.polygon = polygon
        self.kernel = kernel
        self.potential = PotentialEvaluator(polygon, kernel, spec, executor)
        self.logger = logging.getLogger(__name__)
        self._sigma: Optional[Estimate] = None

    @property
    def sides(self) -> List[SideIntegrals]:
        return self.potential.side_integrals()

    def sigma(self) -> Estimate:
        """sigma = sum_i (P_i . nu_i) int_{side i} v_P."""
        if self._sigma is None:
            self._sigma = Estimate.fsum(
                s.total * self.polygon.side(s.index).offset for s in self.sides
            )
        return self._sigma

    def _angles(self, i: int):
        n = self.polygon.n
        theta = self.polygon.interior_angles
        return half_angle_cot(theta[i % n]), half_angle_cot(theta[(i + 1) % n])

    def sliding_residual(self, i: int, constraint) -> Estimate:
        side = self.sides[i % self.polygon.n]
        sigma = self.sigma()
        if _constraint(constraint) is Constraint.AREA:
            return side.mean - sigma / (2.0 * self.polygon.area)
        cot_i, cot_j = self._angles(i)
        return side.total - sigma * ((cot_i + cot_j) / self.polygon.perimeter)

    def tilting_residual(self, i: int, constraint) -> Estimate:
        side = self.sides[i % self.polygon.n]
        difference = side.first_half - side.second_half
        if _constraint(constraint) is Constraint.AREA:
            return difference
        cot_i, cot_j = self._angles(i)
        return difference - self.sigma() * (side.length * (cot_i - cot_j) / (2.0 * self.polygon.perimeter))

    def diagonal_I(self, i: int) -> Estimate:
        """First variation of E when vertex i moves along (P_{i+1} - P_{i-1})."""
        n = self.polygon.n
        i %= n
        if self.polygon.interior_angles[i] >= math.pi:
            raise UnsupportedInputError(f"Vertex {i + 1} is concave; I_i is defined only at convex vertices")
        alpha_minus, alpha_plus = diagonal_angles(self.polygon, i)
        current, previous = self.sides[i], self.sides[(i - 1) % n]
        return (current.end_moment * (2.0 * math.sin(alpha_plus) / current.length)
                - previous.start_moment * (2.0 * math.sin(alpha_minus) / previous.length))

    def diagonal_I_perimeter(self, i: int) -> Estimate:
        """I_i minus the perimeter dilation term 2 (sigma/Per)(cos a- - cos a+)."""
        alpha_minus, alpha_plus = diagonal_angles(self.polygon, i)
        shift = 2.0 * (math.cos(alpha_minus) - math.cos(alpha_plus)) / self.polygon.perimeter
        return self.diagonal_I(i) - self.sigma() * shift

    def report(self, constraint=Constraint.AREA, tolerance: float = DEFAULT_TOLERANCE) -> StationarityReport:
        constraint = _constraint(constraint)
        polygon = self.polygon
        sigma = self.sigma()

        sides, sliding_ok, tilting_ok = [], True, True
        for i in range(polygon.n):
            residuals = {
                "sliding_area": self.sliding_residual(i, Constraint.AREA),
                "sliding_perimeter": self.sliding_residual(i, Constraint.PERIMETER),
                "tilting_area": self.tilting_residual(i, Constraint.AREA),
                "tilting_perimeter": self.tilting_residual(i, Constraint.PERIMETER),
            }
            suffix = constraint.value
            sliding_ok &= passes(residuals[f"sliding_{suffix}"], tolerance)
            tilting_ok &= passes(residuals[f"tilting_{suffix}"], tolerance)
            errors = {name: r.error for name, r in residuals.items()}
            sides.append(SideResidual(
                i=i + 1,
                side_mean=self.sides[i].mean.value,
                err=max(errors.values()),
                errors=errors,
                **{name: r.value for name, r in residuals.items()},
            ))

        vertices, diagonal_ok = [], True
        for i in range(polygon.n):
            if polygon.interior_angles[i] >= math.pi:
                vertices.append(VertexResidual(i=i + 1, convex=False))
                continue
            value = self.diagonal_I(i)
            compensated = self.diagonal_I_perimeter(i)
            relevant = value if constraint is Constraint.AREA else compensated
            diagonal_ok &= passes(relevant, tolerance)
            vertices.append(VertexResidual(i=i + 1, convex=True, diagonal_I=value.value,
                                           diagonal_I_perimeter=compensated.value,
                                           err=max(value.error, compensated.error)))

        verdict = Verdict(constraint=constraint.value, tolerance=tolerance, sliding=sliding_ok,
                          tilting=tilting_ok, diagonal=diagonal_ok,
                          stationary=sliding_ok and tilting_ok)
        self.logger.info(f"Stationarity ({constraint.value}) of {polygon.n}-gon: "
                         f"sliding={sliding_ok} tilting={tilting_ok} diagonal={diagonal_ok}")
        return StationarityReport(sigma=sigma.value, sigma_err=sigma.error, area=polygon.area,
                                  perimeter=polygon.perimeter, sides=sides, vertices=vertices,
                                  verdict=verdict)


def lagrange_sigma(polygon: Polygon, kernel: Kernel, spec: Optional[QuadratureSpec] = None) -> float:
    return StationarityAnalyzer(polygon, kernel, spec).sigma().value


def sliding_residual(polygon: Polygon, kernel: Kernel, i: int, constraint,
                     spec: Optional[QuadratureSpec] = None) -> float:
    return StationarityAnalyzer(polygon, kernel, spec).sliding_residual(i, constraint).value


def tilting_residual(polygon: Polygon, kernel: Kernel, i: int, constraint,
                     spec: Optional[QuadratureSpec] = None) -> float:
    return StationarityAnalyzer(polygon, kernel, spec).tilting_residual(i, constraint).value


def diagonal_I(polygon: Polygon, kernel: Kernel, i: int, spec: Optional[QuadratureSpec] = None) -> float:
    return StationarityAnalyzer(polygon, kernel, spec).diagonal_I(i).value


def check_stationarity(polygon: Polygon, kernel: Kernel, constraint=Constraint.AREA,
                       tolerance: float = DEFAULT_TOLERANCE,
                       spec: Optional[QuadratureSpec] = None,
                       executor: Optional[ChunkedExecutor] = None) -> StationarityReport:
    return StationarityAnalyzer(polygon, kernel, spec, executor).report(constraint, tolerance)
