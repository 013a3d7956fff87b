import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from models.energy import energy
from models.kernel import Kernel
from models.polygon import Polygon, Scaling, distance_to_regular, shape_deviation, transform
from models.schemas import QuadratureSpec
from models.steiner import interior_diagonal, steiner_symmetrize, symmetrize_interior_diagonal
from utils.errors import DomainError, InvalidArgumentError, UnsupportedInputError
from utils.parallel import ChunkedExecutor
from utils.quadrature import Estimate
from utils.validation import InputValidator

logger = logging.getLogger(__name__)

TRIANGLE_LIMIT = 2.0 / 3.0 ** 0.25
PARALLEL_TOL = 1e-9


def triangle_recursion(a0: float, n_steps: int) -> List[float]:
    """Equal-side lengths a_1..a_n of the unit-area isosceles triangles.

    ``a0`` is the half-base of the starting triangle; the first step gives
    ``sqrt(a0^2 + a0^-2)`` and every later one ``sqrt(a^2/4 + 4/a^2)``.
    """
    ok, message = InputValidator.validate_positive(a0, "a0")
    if not ok:
        raise InvalidArgumentError(message)
    if n_steps < 0:
        raise InvalidArgumentError(f"n_steps must be nonnegative, got {n_steps}")
    values: List[float] = []
    a = float(a0)
    for step in range(n_steps):
        if step == 0:
            a = math.sqrt(a * a + 1.0 / (a * a))
        else:
            a = math.sqrt(a * a / 4.0 + 4.0 / (a * a))
        values.append(a)
    return values


def _rhombus_to_rectangle(a: float) -> float:
    a2 = a * a
    a4p1 = a2 * a2 + 1.0
    return math.sqrt(a2 / a4p1 + a4p1 / (4.0 * a2))


def quadrilateral_recursion(a2: float, n_steps: int) -> List[float]:
    """Side lengths a_3..a_{n+2} of the alternating rhombus/rectangle chain.

    Odd terms repeat their predecessor; even terms apply the rectangle map.
    """
    if not a2 >= 1.0:
        raise DomainError(f"The quadrilateral chain needs a2 >= 1, got {a2}", a2=a2)
    if n_steps < 0:
        raise InvalidArgumentError(f"n_steps must be nonnegative, got {n_steps}")
    values: List[float] = []
    a = float(a2)
    for k in range(3, n_steps + 3):
        if k % 2 == 0:
            a = _rhombus_to_rectangle(a)
        values.append(a)
    return values


@dataclass
class SymmetrizationStep:
    step: int
    polygon: Polygon
    direction: Optional[np.ndarray] = None
    energy: Optional[Estimate] = None

    def row(self) -> Dict[str, object]:
        data: Dict[str, object] = {"step": self.step}
        for j, (x, y) in enumerate(self.polygon.vertices.tolist(), start=1):
            data[f"x{j}"] = x
            data[f"y{j}"] = y
        data["area"] = self.polygon.area
        data["energy"] = self.energy.value if self.energy else None
        data["error_bound"] = self.energy.error if self.energy else None
        return data


@dataclass
class SymmetrizationRun:
    shape: str
    steps: List[SymmetrizationStep] = field(default_factory=list)

    @property
    def final(self) -> Polygon:
        return self.steps[-1].polygon

    def summary(self) -> Dict[str, object]:
        side_dev, angle_dev = shape_deviation(self.final)
        energies = [s.energy for s in self.steps if s.energy is not None]
        return {
            "shape": self.shape,
            "steps": len(self.steps) - 1,
            "final_vertices": self.final.vertices.tolist(),
            "final_energy": energies[-1].as_dict() if energies else None,
            "monotone": is_monotone(energies),
            "max_side_deviation": side_dev,
            "max_angle_deviation": angle_dev,
            "distance_to_regular": distance_to_regular(self.final),
        }


def is_monotone(energies: List[Estimate]) -> bool:
    """Nondecreasing up to the combined error bounds of neighbours."""
    return all(b.value >= a.value - (a.error + b.error) for a, b in zip(energies, energies[1:]))


def _is_parallel(u: np.ndarray, w: np.ndarray) -> bool:
    cross = u[0] * w[1] - u[1] * w[0]
    return abs(cross) <= PARALLEL_TOL * np.linalg.norm(u) * np.linalg.norm(w)


class SymmetrizationAgent:
    """Runs the chain of Steiner symmetrizations that turns a triangle into
    the equilateral triangle and a quadrilateral into the square."""

    def __init__(self, kernel: Optional[Kernel] = None, spec: Optional[QuadratureSpec] = None,
                 executor: Optional[ChunkedExecutor] = None):
        self.kernel = kernel
        self.spec = spec
        self.executor = executor
        self.logger = logging.getLogger(__name__)

    def _normalize(self, polygon: Polygon) -> Polygon:
        if polygon.n not in (3, 4):
            raise UnsupportedInputError(
                f"Symmetrization chains exist for triangles and quadrilaterals, got {polygon.n} vertices"
            )
        return transform(polygon, Scaling(1.0 / math.sqrt(polygon.area), tuple(polygon.centroid)))

    def _record(self, run: SymmetrizationRun, polygon: Polygon, direction: Optional[np.ndarray]) -> None:
        value = energy(polygon, self.kernel, self.spec, self.executor) if self.kernel else None
        step = SymmetrizationStep(step=len(run.steps), polygon=polygon, direction=direction, energy=value)
        run.steps.append(step)
        if value is not None:
            self.logger.info(f"Symmetrization step {step.step}: E = {value.value:.12g} +/- {value.error:.2g}")
        else:
            self.logger.info(f"Symmetrization step {step.step}: {polygon.n} vertices")

    def _triangle_direction(self, polygon: Polygon, previous: Optional[np.ndarray]) -> np.ndarray:
        if previous is None:
            return polygon.edges[0]
        for edge in polygon.edges:
            if not _is_parallel(edge, previous):
                return edge
        raise DomainError("Every side of the triangle is parallel to the last direction")

    def _quad_direction(self, polygon: Polygon, step: int, previous: Optional[np.ndarray]) -> np.ndarray:
        if step == 2:
            # axis of the kite produced by the diagonal step
            return np.array([previous[1], -previous[0]])
        if step % 2 == 1:
            return polygon.edges[0]
        return polygon.vertex(2) - polygon.vertex(0)

    def run(self, polygon: Polygon, steps: int) -> SymmetrizationRun:
        if steps < 0:
            raise InvalidArgumentError(f"steps must be nonnegative, got {steps}")
        try:
            current = self._normalize(polygon)
            shape = "triangle" if current.n == 3 else "quad"
            run = SymmetrizationRun(shape=shape)
            self._record(run, current, None)

            direction: Optional[np.ndarray] = None
            for k in range(1, steps + 1):
                if shape == "triangle":
                    direction = self._triangle_direction(current, direction)
                    current = steiner_symmetrize(current, direction)
                elif k == 1:
                    a, b = interior_diagonal(current)
                    direction = current.vertex(b) - current.vertex(a)
                    if current.is_convex:
                        current = steiner_symmetrize(current, direction)
                    else:
                        self.logger.info("Nonconvex quadrilateral: symmetrizing across the interior diagonal")
                        current = symmetrize_interior_diagonal(current)
                else:
                    direction = self._quad_direction(current, k, direction)
                    current = steiner_symmetrize(current, direction)
                self._record(run, current, direction)
            return run
        except Exception as e:
            self.logger.error(f"Symmetrization run failed: {e}")
            raise


def symmetrization_run(polygon: Polygon, kernel: Optional[Kernel], steps: int,
                       spec: Optional[QuadratureSpec] = None,
                       executor: Optional[ChunkedExecutor] = None) -> List[SymmetrizationStep]:
    return SymmetrizationAgent(kernel, spec, executor).run(polygon, steps).steps
