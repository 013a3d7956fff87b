import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np
from scipy.optimize import minimize

from models.energy import energy
from models.flows import Constraint
from models.kernel import Kernel
from models.polygon import Polygon, shape_deviation, shape_signature
from models.schemas import QuadratureSpec, StationarityReport
from models.stationarity import check_stationarity
from models.variation import VariationAnalyzer
from utils.errors import InvalidArgumentError, OptimizationError, PolyRieszError
from utils.parallel import ChunkedExecutor
from utils.quadrature import Estimate
from utils.validation import InputValidator

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("iter", "energy", "error_bound", "grad_norm", "max_side_dev", "max_angle_dev")


@dataclass
class OptimizerOptions:
    max_iters: int = 200
    gtol: float = 1e-7
    xtol: float = 1e-10
    seed: Optional[int] = None
    armijo: float = 1e-4
    max_halvings: int = 30
    stall_gain: float = 1e-12
    stall_iters: int = 5
    fallback_evaluations: int = 400


@dataclass
class OptimizationResult:
    polygon: Polygon
    energy: Estimate
    trace: List[Dict[str, float]] = field(default_factory=list)
    converged: bool = False
    used_fallback: bool = False

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1

    def to_dict(self) -> Dict[str, Any]:
        side_dev, angle_dev = shape_deviation(self.polygon)
        return {
            "vertices": self.polygon.vertices.tolist(),
            "energy": self.energy.as_dict(),
            "converged": self.converged,
            "used_fallback": self.used_fallback,
            "iterations": self.iterations,
            "convex": self.polygon.is_convex,
            "max_side_deviation": side_dev,
            "max_angle_deviation": angle_dev,
            "signature": shape_signature(self.polygon),
        }


def random_polygon(n: int, area: float, rng: np.random.Generator) -> Polygon:
    """Star-shaped random n-gon about the origin, scaled to ``area``."""
    gaps = rng.uniform(0.5, 1.5, size=n)
    angles = np.cumsum(gaps) / gaps.sum() * 2.0 * math.pi
    radii = rng.uniform(0.6, 1.4, size=n)
    polygon = Polygon(np.column_stack([radii * np.cos(angles), radii * np.sin(angles)]))
    return rescale_area(polygon, area)


def rescale_area(polygon: Polygon, area: float) -> Polygon:
    """Dilate about the centroid to the target area."""
    c = polygon.centroid
    factor = math.sqrt(area / polygon.area)
    return Polygon(c + factor * (polygon.vertices - c))


class EnergyOptimizer:
    """Projected gradient ascent of E over N-gons of fixed area.

    Each step moves the vertices along dE - (sigma/|P|) d|P| and dilates back
    to the target area about the centroid. Step sizes follow Barzilai-Borwein
    with Armijo backtracking; a Nelder-Mead search takes over when the ascent
    stalls.
    """

    def __init__(self, kernel: Kernel, spec: Optional[QuadratureSpec] = None,
                 executor: Optional[ChunkedExecutor] = None, options: Optional[OptimizerOptions] = None):
        self.kernel = kernel
        self.spec = spec
        self.executor = executor or ChunkedExecutor()
        self.options = options or OptimizerOptions()
        self.logger = logging.getLogger(__name__)

    def _energy(self, polygon: Polygon) -> Estimate:
        return energy(polygon, self.kernel, self.spec, self.executor)

    def _trace_row(self, k: int, polygon: Polygon, value: Estimate, grad_norm: float) -> Dict[str, float]:
        side_dev, angle_dev = shape_deviation(polygon)
        return {"iter": k, "energy": value.value, "error_bound": value.error, "grad_norm": grad_norm,
                "max_side_dev": side_dev, "max_angle_dev": angle_dev}

    def _try_step(self, polygon: Polygon, direction: np.ndarray, step: float, area: float) -> Optional[Polygon]:
        try:
            return rescale_area(Polygon(polygon.vertices + step * direction), area)
        except PolyRieszError:
            return None

    def _fallback(self, polygon: Polygon, value: Estimate, area: float) -> tuple:
        """Nelder-Mead on the vertex coordinates, objective -E of the area-rescaled polygon."""
        self.logger.warning(f"Gradient ascent stalled at E = {value.value:.12g}; switching to Nelder-Mead")

        def objective(x: np.ndarray) -> float:
            try:
                return -self._energy(rescale_area(Polygon(x.reshape(-1, 2)), area)).value
            except PolyRieszError:
                return math.inf

        scale = math.sqrt(area)
        result = minimize(objective, polygon.vertices.reshape(-1), method="Nelder-Mead",
                          options={"maxfev": self.options.fallback_evaluations,
                                   "xatol": 1e-9 * scale, "fatol": 1e-14 * abs(value.value)})
        if math.isfinite(result.fun) and -result.fun > value.value:
            candidate = rescale_area(Polygon(result.x.reshape(-1, 2)), area)
            return candidate, self._energy(candidate)
        return polygon, value

    def maximize_energy(self, n: int, area: float = 1.0,
                        init: Union[Polygon, str] = "random") -> OptimizationResult:
        if not isinstance(n, (int, np.integer)) or n < 3:
            raise InvalidArgumentError(f"An N-gon needs N >= 3, got {n}")
        ok, message = InputValidator.validate_positive(area, "Area")
        if not ok:
            raise InvalidArgumentError(message)
        opts = self.options

        if isinstance(init, Polygon):
            if init.n != n:
                raise InvalidArgumentError(f"Initial polygon has {init.n} vertices, expected {n}")
            polygon = rescale_area(init, area)
        elif init == "random":
            polygon = random_polygon(n, area, np.random.default_rng(opts.seed))
        else:
            raise InvalidArgumentError(f"Unknown initialization '{init}'")

        value = self._energy(polygon)
        trace: List[Dict[str, float]] = []
        previous_x = previous_g = None
        stalled = 0
        used_fallback = False
        converged = False
        settled = False
        base_step = 0.1 * math.sqrt(area) / n

        for k in range(opts.max_iters + 1):
            gradient = VariationAnalyzer(polygon, self.kernel, self.spec, self.executor).projected_gradient()
            grad_norm = float(np.linalg.norm(gradient))
            trace.append(self._trace_row(k, polygon, value, grad_norm))
            self.logger.info(f"Iteration {k}: E = {value.value:.14g} |G| = {grad_norm:.3g}")

            if settled or grad_norm <= opts.gtol * abs(value.value):
                converged = True
                break
            if k == opts.max_iters:
                break

            if previous_x is None:
                step = base_step / float(np.abs(gradient).max())
            else:
                dx = (polygon.vertices - previous_x).reshape(-1)
                dg = (gradient - previous_g).reshape(-1)
                curvature = abs(float(dx @ dg))
                step = float(dx @ dx) / curvature if curvature > 0 else base_step / grad_norm
            # never move a vertex by more than a quarter of its shortest side
            step = min(step, 0.25 * float(polygon.side_lengths.min()) / float(np.abs(gradient).max()))

            accepted = None
            for _ in range(opts.max_halvings):
                candidate = self._try_step(polygon, gradient, step, area)
                if candidate is not None:
                    new_value = self._energy(candidate)
                    slack = value.error + new_value.error
                    if new_value.value - value.value >= opts.armijo * step * grad_norm ** 2 - slack:
                        accepted = (candidate, new_value)
                        break
                step *= 0.5

            if accepted is None:
                candidate, new_value = self._fallback(polygon, value, area)
                used_fallback = True
                if new_value.value <= value.value:
                    if grad_norm <= math.sqrt(opts.gtol) * abs(value.value):
                        # no measurable ascent left at quadrature resolution
                        converged = True
                        break
                    self.logger.error(f"Line search and fallback both failed at iteration {k}")
                    raise OptimizationError(
                        f"No ascent step found at iteration {k} (|G| = {grad_norm:.3g})", trace=trace
                    )
                accepted = (candidate, new_value)

            candidate, new_value = accepted
            gain = (new_value.value - value.value) / abs(value.value)
            before, after = shape_signature(polygon), shape_signature(candidate)
            shape_change = max(np.abs(np.subtract(before["sides"], after["sides"])).max(),
                               np.abs(np.subtract(before["angles"], after["angles"])).max())
            previous_x, previous_g = polygon.vertices, gradient
            polygon, value = candidate, new_value

            settled = shape_change <= opts.xtol
            stalled = stalled + 1 if gain < opts.stall_gain else 0
            if stalled >= opts.stall_iters:
                if used_fallback:
                    settled = True
                    continue
                polygon, value = self._fallback(polygon, value, area)
                used_fallback = True
                stalled = 0
                previous_x = previous_g = None

        if not polygon.is_convex:
            self.logger.warning(f"Terminal {n}-gon is not convex")
        return OptimizationResult(polygon=polygon, energy=value, trace=trace,
                                  converged=converged, used_fallback=used_fallback)


def maximize_energy(n: int, area: float, kernel: Kernel, init: Union[Polygon, str] = "random",
                    options: Optional[OptimizerOptions] = None, spec: Optional[QuadratureSpec] = None,
                    executor: Optional[ChunkedExecutor] = None) -> OptimizationResult:
    return EnergyOptimizer(kernel, spec, executor, options).maximize_energy(n, area, init)


def stationarity_at_optimum(result: OptimizationResult, kernel: Kernel,
                            spec: Optional[QuadratureSpec] = None, tolerance: float = 1e-5,
                            constraint: Constraint = Constraint.AREA) -> StationarityReport:
    return check_stationarity(result.polygon, kernel, constraint, tolerance, spec)
