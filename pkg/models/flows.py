"""Perturbation flows of a polygon and the constraint-restoring dilations.

Four families are supported: sliding a side parallel to itself, tilting a
side about its midpoint, moving a vertex parallel to the diagonal through
its neighbours, and the two-sided shear of a quadrilateral in the frame of
one of its diagonals.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
from shapely.geometry import LineString

from models.polygon import Polygon, check_vertices, diagonal_angles, half_angle_cot
from utils.errors import DomainError, InvalidArgumentError, RangeError, UnsupportedInputError

logger = logging.getLogger(__name__)

MIN_SIN = 1e-6
RANGE_SCAN_STEPS = 64
RANGE_SAFETY = 0.5
QUAD_AXIS_TOL = 1e-12


class FlowFamily(str, Enum):
    SLIDING = "sliding"
    TILTING = "tilting"
    DIAGONAL_VERTEX = "diagonal_vertex"
    QUAD_TWO_SIDED = "quad_two_sided"


class Constraint(str, Enum):
    NONE = "none"
    AREA = "area"
    PERIMETER = "perimeter"


@dataclass(frozen=True)
class FlowSpec:
    """A flow family anchored at a side, vertex or (for quadrilaterals) diagonal.

    ``index`` is 0-based: the side for sliding and tilting, the vertex for
    the diagonal-vertex flow, and 0 (diagonal P0P2) or 1 (P1P3) for the
    quadrilateral flow. Missing quadrilateral betas are chosen by
    ``quad_case_betas``.
    """

    family: FlowFamily
    index: int
    constraint: Constraint = Constraint.NONE
    beta_plus: Optional[float] = None
    beta_minus: Optional[float] = None

    def describe(self) -> dict:
        payload = {"family": self.family.value, "constraint": self.constraint.value}
        key = {FlowFamily.SLIDING: "side", FlowFamily.TILTING: "side",
               FlowFamily.DIAGONAL_VERTEX: "vertex", FlowFamily.QUAD_TWO_SIDED: "diagonal"}[self.family]
        payload[key] = self.index + 1
        if self.family is FlowFamily.QUAD_TWO_SIDED:
            payload["beta_plus"] = self.beta_plus
            payload["beta_minus"] = self.beta_minus
        return payload


@dataclass(frozen=True)
class QuadFrame:
    """Frame of a quadrilateral diagonal: origin at its midpoint, e1 along it,
    and e2 chosen so the vertex following the diagonal start has x2 > 0."""

    start: int
    origin: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    @property
    def upper(self) -> int:
        return (self.start + 1) % 4

    @property
    def lower(self) -> int:
        return (self.start + 3) % 4

    def coords(self, point: np.ndarray) -> Tuple[float, float]:
        rel = np.asarray(point, dtype=float) - self.origin
        return float(rel @ self.e1), float(rel @ self.e2)


def quad_frame(polygon: Polygon, diagonal: int = 0) -> QuadFrame:
    if polygon.n != 4:
        raise UnsupportedInputError(f"The two-sided flow needs a quadrilateral, got {polygon.n} vertices")
    if diagonal not in (0, 1):
        raise InvalidArgumentError(f"diagonal must be 0 or 1, got {diagonal}")
    a, c = polygon.vertex(diagonal), polygon.vertex(diagonal + 2)
    if not polygon.to_shapely().contains(LineString([tuple(a), tuple(c)])):
        raise UnsupportedInputError(
            f"Diagonal P{diagonal + 1}P{diagonal + 3} is not interior to the quadrilateral"
        )
    e1 = (c - a) / np.linalg.norm(c - a)
    return QuadFrame(start=diagonal, origin=0.5 * (a + c), e1=e1, e2=np.array([e1[1], -e1[0]]))


def quad_case_betas(polygon: Polygon, diagonal: int = 0) -> Tuple[float, float, str]:
    """Shear rates (beta_plus, beta_minus, case) for the two-sided flow.

    Needs the upper vertex leaning toward the diagonal start (x1 < 0). If
    the lower vertex is to the right of the x2 axis (case "i") only the upper
    half moves; if it is to the left (case "ii") the lower half moves with
    rate x1/x2 of the lower vertex. A lower vertex on the axis is treated as
    case "i" and reported as "i-boundary".
    """
    frame = quad_frame(polygon, diagonal)
    x1_up, x2_up = frame.coords(polygon.vertex(frame.upper))
    x1_low, x2_low = frame.coords(polygon.vertex(frame.lower))
    zeta = x1_up / x2_up
    if not zeta < 0:
        raise DomainError(
            f"Vertex P{frame.upper + 1} must lean toward P{diagonal + 1} (alpha_minus > alpha_plus); "
            f"slope is {zeta:.6g}"
        )
    scale = max(1.0, float(np.abs(polygon.vertices).max()))
    if abs(x1_low) <= QUAD_AXIS_TOL * scale:
        logger.warning(f"Vertex P{frame.lower + 1} lies on the x2 axis; using beta_minus = 0")
        return -zeta, 0.0, "i-boundary"
    if x1_low > 0:
        return -zeta, 0.0, "i"
    return -zeta, x1_low / x2_low, "ii"


def _tilting_pieces(polygon: Polygon, i: int):
    theta_i = float(polygon.interior_angles[i % polygon.n])
    theta_j = float(polygon.interior_angles[(i + 1) % polygon.n])
    prev, cur, nxt, after = (polygon.vertex(i - 1), polygon.vertex(i),
                             polygon.vertex(i + 1), polygon.vertex(i + 2))
    tau_i = (cur - prev) / np.linalg.norm(cur - prev)
    tau_j = (nxt - after) / np.linalg.norm(nxt - after)
    if theta_i > math.pi:
        tau_i = -tau_i
    if theta_j > math.pi:
        tau_j = -tau_j
    return math.fmod(theta_i, math.pi), math.fmod(theta_j, math.pi), tau_i, tau_j


def _resolve(polygon: Polygon, spec: FlowSpec) -> FlowSpec:
    """Validate ``spec`` against ``polygon`` and fill in default betas."""
    n = polygon.n
    if spec.family is FlowFamily.QUAD_TWO_SIDED:
        frame = quad_frame(polygon, spec.index)
        if spec.beta_plus is None or spec.beta_minus is None:
            beta_plus, beta_minus, _ = quad_case_betas(polygon, frame.start)
            return FlowSpec(spec.family, spec.index, spec.constraint,
                            spec.beta_plus if spec.beta_plus is not None else beta_plus,
                            spec.beta_minus if spec.beta_minus is not None else beta_minus)
        if spec.beta_plus < 0 or spec.beta_minus < 0:
            raise InvalidArgumentError("Quadrilateral shear rates must be nonnegative")
        return spec

    if not 0 <= spec.index < n:
        raise InvalidArgumentError(f"Index {spec.index} out of range for a {n}-gon")
    if spec.family is FlowFamily.TILTING:
        theta_i, theta_j, _, _ = _tilting_pieces(polygon, spec.index)
        if min(math.sin(theta_i), math.sin(theta_j)) < MIN_SIN:
            raise DomainError(f"Tilting side {spec.index + 1} needs reduced angles away from 0 and pi")
    if spec.family is FlowFamily.DIAGONAL_VERTEX and polygon.interior_angles[spec.index] >= math.pi:
        raise UnsupportedInputError(f"Vertex {spec.index + 1} is concave; the diagonal flow needs a convex vertex")
    return spec


def _raw_vertices(polygon: Polygon, spec: FlowSpec, t: float) -> np.ndarray:
    v = polygon.vertices.copy()
    n, i = polygon.n, spec.index
    if spec.family is FlowFamily.SLIDING:
        theta = polygon.interior_angles
        prev, cur, nxt, after = v[(i - 1) % n], v[i], v[(i + 1) % n], v[(i + 2) % n]
        v[i] = cur + t / math.sin(theta[i]) * (cur - prev) / np.linalg.norm(cur - prev)
        v[(i + 1) % n] = nxt + t / math.sin(theta[(i + 1) % n]) * (nxt - after) / np.linalg.norm(nxt - after)
    elif spec.family is FlowFamily.TILTING:
        theta_i, theta_j, tau_i, tau_j = _tilting_pieces(polygon, i)
        length = float(polygon.side_lengths[i])
        v[i] = v[i] + length * math.sin(t) / (2.0 * math.sin(theta_i - t)) * tau_i
        v[(i + 1) % n] = v[(i + 1) % n] - length * math.sin(t) / (2.0 * math.sin(theta_j + t)) * tau_j
    elif spec.family is FlowFamily.DIAGONAL_VERTEX:
        chord = v[(i + 1) % n] - v[(i - 1) % n]
        v[i] = v[i] + t * chord / np.linalg.norm(chord)
    else:
        v = v + t * flow_velocity(polygon, spec)
    return v


def _degeneracy(polygon: Polygon, spec: FlowSpec, t: float) -> Optional[str]:
    if spec.family is FlowFamily.TILTING:
        theta_i, theta_j, _, _ = _tilting_pieces(polygon, spec.index)
        if not (0.0 < theta_i - t < math.pi and 0.0 < theta_j + t < math.pi):
            return "tilting angle reaches an adjacent side"
    vertices = _raw_vertices(polygon, spec, t)
    ok, message = check_vertices(vertices)
    return None if ok else message


def _scan_cap(polygon: Polygon, spec: FlowSpec) -> float:
    if spec.family is FlowFamily.TILTING:
        return math.pi
    if spec.family is FlowFamily.QUAD_TWO_SIDED:
        return 2.0
    return polygon.diameter


def admissible_range(polygon: Polygon, spec: FlowSpec) -> Tuple[float, str]:
    """Largest |t| the flow accepts, with the degeneracy that bounds it.

    Scans |t| for both signs until the first invalid polygon, bisects the
    crossing and applies the safety factor. The result is cached per vertex
    array and resolved flow.
    """
    spec = _resolve(polygon, spec)
    return _cached_range(polygon.vertices.tobytes(), polygon.n, spec)


@lru_cache(maxsize=512)
def _cached_range(vertices: bytes, n: int, spec: FlowSpec) -> Tuple[float, str]:
    polygon = Polygon(np.frombuffer(vertices, dtype=float).reshape(n, 2))
    cap = _scan_cap(polygon, spec)
    best, reason = cap, "scan limit"
    for direction in (1.0, -1.0):
        previous = 0.0
        for k in range(1, RANGE_SCAN_STEPS + 1):
            t = cap * k / RANGE_SCAN_STEPS
            problem = _degeneracy(polygon, spec, direction * t)
            if problem is None:
                previous = t
                continue
            lo, hi = previous, t
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                if _degeneracy(polygon, spec, direction * mid) is None:
                    lo = mid
                else:
                    hi = mid
            if hi < best:
                best, reason = hi, problem
            break
    return RANGE_SAFETY * best, reason


def flow_velocity(polygon: Polygon, spec: FlowSpec) -> np.ndarray:
    """Vertex velocities d/dt P_j^t at t = 0 for the raw (unrescaled) flow."""
    spec = _resolve(polygon, spec)
    n, i = polygon.n, spec.index
    velocity = np.zeros((n, 2))
    v = polygon.vertices
    if spec.family is FlowFamily.SLIDING:
        theta = polygon.interior_angles
        velocity[i] = polygon.tangents[(i - 1) % n] / math.sin(theta[i])
        velocity[(i + 1) % n] = -polygon.tangents[(i + 1) % n] / math.sin(theta[(i + 1) % n])
    elif spec.family is FlowFamily.TILTING:
        theta_i, theta_j, tau_i, tau_j = _tilting_pieces(polygon, i)
        length = float(polygon.side_lengths[i])
        velocity[i] = length / (2.0 * math.sin(theta_i)) * tau_i
        velocity[(i + 1) % n] = -length / (2.0 * math.sin(theta_j)) * tau_j
    elif spec.family is FlowFamily.DIAGONAL_VERTEX:
        chord = v[(i + 1) % n] - v[(i - 1) % n]
        velocity[i] = chord / np.linalg.norm(chord)
    else:
        frame = quad_frame(polygon, i)
        _, x2_up = frame.coords(v[frame.upper])
        _, x2_low = frame.coords(v[frame.lower])
        velocity[frame.upper] = spec.beta_plus * x2_up * frame.e1
        velocity[frame.lower] = -spec.beta_minus * x2_low * frame.e1
    return velocity


def apply_flow(polygon: Polygon, spec: FlowSpec, t: float) -> Polygon:
    """The perturbed polygon P_t (no rescaling)."""
    spec = _resolve(polygon, spec)
    if t == 0:
        return polygon
    limit, reason = admissible_range(polygon, spec)
    if abs(t) > limit:
        raise RangeError(f"|t| = {abs(t):.6g} exceeds the admissible range {limit:.6g} ({reason})",
                         limit=limit, reason=reason)
    return Polygon(_raw_vertices(polygon, spec, t))


def rescale_constraint(reference: Polygon, perturbed: Polygon, constraint: Constraint) -> Polygon:
    """Dilate ``perturbed`` about the origin to match the reference area or perimeter."""
    constraint = Constraint(constraint)
    if constraint is Constraint.NONE:
        return perturbed
    if constraint is Constraint.AREA:
        factor = math.sqrt(reference.area / perturbed.area)
    else:
        factor = reference.perimeter / perturbed.perimeter
    if factor == 1.0:
        return perturbed
    return Polygon(factor * perturbed.vertices)


def constrained_flow(polygon: Polygon, spec: FlowSpec, t: float) -> Polygon:
    return rescale_constraint(polygon, apply_flow(polygon, spec, t), spec.constraint)


def area_gradient(polygon: Polygon) -> np.ndarray:
    """d|P|/dP_j = (l_{j-1} nu_{j-1} + l_j nu_j) / 2."""
    weighted = polygon.side_lengths[:, None] * polygon.normals
    return 0.5 * (np.roll(weighted, 1, axis=0) + weighted)


def perimeter_gradient(polygon: Polygon) -> np.ndarray:
    """dPer/dP_j = u_{j-1} - u_j with u the unit side tangents."""
    return np.roll(polygon.tangents, 1, axis=0) - polygon.tangents


def analytic_geometry_derivatives(polygon: Polygon, spec: FlowSpec) -> Tuple[float, float]:
    """(d|P_t|/dt, dPer(P_t)/dt) at t = 0 along the raw flow."""
    spec = _resolve(polygon, spec)
    i, n = spec.index, polygon.n
    theta = polygon.interior_angles
    if spec.family is FlowFamily.SLIDING:
        return (float(polygon.side_lengths[i]),
                half_angle_cot(theta[i]) + half_angle_cot(theta[(i + 1) % n]))
    if spec.family is FlowFamily.TILTING:
        return (0.0, 0.5 * float(polygon.side_lengths[i])
                * (half_angle_cot(theta[i]) - half_angle_cot(theta[(i + 1) % n])))
    if spec.family is FlowFamily.DIAGONAL_VERTEX:
        alpha_minus, alpha_plus = diagonal_angles(polygon, i)
        return 0.0, math.cos(alpha_minus) - math.cos(alpha_plus)
    velocity = flow_velocity(polygon, spec)
    return (float((velocity * area_gradient(polygon)).sum()),
            float((velocity * perimeter_gradient(polygon)).sum()))


def fd_geometry_derivatives(polygon: Polygon, spec: FlowSpec, h: float) -> Tuple[float, float]:
    """Central differences of area and perimeter along the raw flow."""
    plus, minus = apply_flow(polygon, spec, h), apply_flow(polygon, spec, -h)
    return ((plus.area - minus.area) / (2.0 * h),
            (plus.perimeter - minus.perimeter) / (2.0 * h))
