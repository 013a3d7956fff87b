import logging
import math
from typing import List, Optional, Tuple

import numpy as np
import tripy

from models.kernel import Kernel
from models.polygon import Polygon, regular_ngon
from models.potential import PotentialEvaluator
from models.schemas import EnergyResult, QuadratureSpec
from utils.errors import AccuracyError
from utils.parallel import ChunkedExecutor
from utils.quadrature import Estimate, hp_rule

logger = logging.getLogger(__name__)

Triangle = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _ccw(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> Triangle:
    cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (a, b, c) if cross > 0 else (a, c, b)


def outer_triangles(polygon: Polygon) -> List[Triangle]:
    """Triangles (apex, A, B) covering P; the potential is smooth at every apex.

    Convex polygons get a fan from the centroid. Nonconvex polygons are ear
    clipped and every ear is split in three at its own centroid.
    """
    if polygon.is_convex:
        c = polygon.centroid
        return [(c, polygon.vertex(i), polygon.vertex(i + 1)) for i in range(polygon.n)]

    triangles = []
    for ear in tripy.earclip([tuple(v) for v in polygon.vertices.tolist()]):
        a, b, c = _ccw(*(np.asarray(p, dtype=float) for p in ear))
        g = (a + b + c) / 3.0
        triangles.extend([(g, a, b), (g, b, c), (g, c, a)])
    return triangles


class EnergyEvaluator:
    """E(P) = int_P v_P(x) dx.

    Each outer triangle is mapped from the unit square by
    ``x = apex + lam * (A + s (B - A) - apex)``, and integrated with a tensor
    rule graded toward the base (``lam -> 1``) and its two corners. The rule
    is p-refined until two successive orders agree to the tolerance.
    """

    def __init__(self, polygon: Polygon, kernel: Kernel, spec: Optional[QuadratureSpec] = None,
                 executor: Optional[ChunkedExecutor] = None):
        self.polygon = polygon
        self.kernel = kernel
        self.spec = spec or QuadratureSpec()
        self.potential = PotentialEvaluator(polygon, kernel, self.spec, executor)
        self.logger = logging.getLogger(__name__)
        self._triangles = outer_triangles(polygon)

    def _rule(self, order: int, levels: int) -> Tuple[np.ndarray, np.ndarray]:
        ratio = self.spec.grading_ratio
        lam, w_lam = hp_rule(order, levels, ratio, "right")
        s, w_s = hp_rule(order, levels, ratio, "both")
        points, weights = [], []
        L, S = np.meshgrid(lam, s, indexing="ij")
        W = np.outer(w_lam, w_s) * L
        for apex, a, b in self._triangles:
            base = a[None, None, :] + S[..., None] * (b - a)[None, None, :]
            x = apex + L[..., None] * (base - apex)
            jacobian = abs((a[0] - apex[0]) * (b[1] - apex[1]) - (a[1] - apex[1]) * (b[0] - apex[0]))
            points.append(x.reshape(-1, 2))
            weights.append((W * jacobian).reshape(-1))
        return np.concatenate(points), np.concatenate(weights)

    def _apply(self, order: int, levels: int) -> Tuple[float, float, int]:
        points, weights = self._rule(order, levels)
        values, errors = self.potential.evaluate(points)
        return math.fsum(weights * values), math.fsum(weights * errors), points.shape[0]

    def compute(self) -> EnergyResult:
        spec = self.spec
        order, levels = spec.outer_triangle_order, spec.grading_levels
        previous, _, _ = self._apply(order, levels)
        for refinement in range(1, spec.max_refinements + 1):
            order, levels = order + 2, levels + 1
            current, inner_err, count = self._apply(order, levels)
            diff = abs(current - previous)
            self.logger.debug(f"Energy refinement {refinement}: order={order} levels={levels} "
                              f"E={current:.17g} diff={diff:.3g}")
            if diff <= spec.tolerance * abs(current):
                self.logger.info(f"Energy of {self.polygon.n}-gon: {current:.12g} +/- {diff + inner_err:.2g}")
                return EnergyResult(value=current, error=diff + inner_err, points=count,
                                    refinements=refinement)
            previous = current

        self.logger.error(f"Energy quadrature did not converge after {spec.max_refinements} refinements")
        raise AccuracyError(
            f"Energy quadrature did not reach relative tolerance {spec.tolerance}",
            estimate=previous,
            error_bound=diff,
        )

    def estimate(self) -> Estimate:
        result = self.compute()
        return Estimate(result.value, result.error)


def energy(polygon: Polygon, kernel: Kernel, spec: Optional[QuadratureSpec] = None,
           executor: Optional[ChunkedExecutor] = None) -> Estimate:
    """Return E(P) as ``(value, error_estimate)``."""
    return EnergyEvaluator(polygon, kernel, spec, executor).estimate()


def energy_ratio_to_regular(polygon: Polygon, kernel: Kernel, spec: Optional[QuadratureSpec] = None,
                            executor: Optional[ChunkedExecutor] = None) -> float:
    own = energy(polygon, kernel, spec, executor)
    reference = energy(regular_ngon(polygon.n, polygon.area), kernel, spec, executor)
    return own.value / reference.value
