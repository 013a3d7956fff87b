"""Polygon representation, per-side data, rigid motions and reference shapes."""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
from shapely.geometry import LinearRing
from shapely.geometry import Polygon as ShapelyPolygon
from shapely import affinity

from utils.errors import DomainError, InvalidArgumentError, InvalidPolygonError
from utils.validation import InputValidator

logger = logging.getLogger(__name__)

GEOMETRY_TOL = 1e-12
ANGLE_TOL = 1e-9


def _signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _turn_angles(vertices: np.ndarray) -> np.ndarray:
    incoming = vertices - np.roll(vertices, 1, axis=0)
    outgoing = np.roll(vertices, -1, axis=0) - vertices
    cross = incoming[:, 0] * outgoing[:, 1] - incoming[:, 1] * outgoing[:, 0]
    dot = (incoming * outgoing).sum(axis=1)
    return np.arctan2(cross, dot)


def check_vertices(vertices: Any) -> Tuple[bool, str]:
    """Check a CCW vertex list against every polygon invariant.

    Returns ``(is_valid, message)`` like the input validators; orientation
    is required to be counterclockwise.
    """
    ok, message = InputValidator.validate_vertices(vertices)
    if not ok:
        return ok, message
    array = np.asarray(vertices, dtype=float)
    scale = max(1.0, float(np.abs(array).max()))

    steps = np.linalg.norm(np.roll(array, -1, axis=0) - array, axis=1)
    if np.any(steps <= GEOMETRY_TOL * scale):
        index = int(np.argmin(steps))
        return False, f"Consecutive vertices {index + 1} and {(index + 1) % len(array) + 1} coincide"

    if abs(_signed_area(array)) <= GEOMETRY_TOL * scale * scale:
        return False, "Polygon has zero area"

    if not LinearRing(array).is_simple:
        return False, "Polygon boundary self-intersects"

    if _signed_area(array) < 0:
        return False, "Vertices are ordered clockwise"

    theta = math.pi - _turn_angles(array)
    for target, label in ((0.0, "0"), (math.pi, "pi"), (2 * math.pi, "2*pi")):
        close = np.abs(theta - target) < ANGLE_TOL
        if close.any():
            return False, f"Interior angle at vertex {int(np.argmax(close)) + 1} is degenerate (close to {label})"

    return True, "Valid"


@dataclass(frozen=True)
class SideData:
    index: int
    start: np.ndarray
    end: np.ndarray
    length: float
    tangent: np.ndarray
    normal: np.ndarray
    midpoint: np.ndarray
    theta_start: float
    theta_end: float

    @property
    def reduced_theta_start(self) -> float:
        return math.fmod(self.theta_start, math.pi)

    @property
    def reduced_theta_end(self) -> float:
        return math.fmod(self.theta_end, math.pi)

    @property
    def offset(self) -> float:
        """x . nu, constant along the side."""
        return float(np.dot(self.start, self.normal))


class Polygon:
    """Simple polygon with counterclockwise, immutable vertices.

    Indices are 0-based and cyclic: side ``i`` joins vertex ``i`` to vertex
    ``i + 1``.
    """

    def __init__(self, vertices: Any, reorient: bool = False):
        ok, message = InputValidator.validate_vertices(vertices)
        if not ok:
            raise InvalidPolygonError(message)
        array = np.array(vertices, dtype=float)

        if reorient and _signed_area(array) < 0:
            logger.warning("Polygon given clockwise; reversing vertex order")
            array = np.concatenate([array[:1], array[:0:-1]])

        ok, message = check_vertices(array)
        if not ok:
            raise InvalidPolygonError(message)

        array.setflags(write=False)
        self._vertices = array

    @classmethod
    def from_dict(cls, data: Dict[str, Any], reorient: bool = True) -> "Polygon":
        if not isinstance(data, dict) or "vertices" not in data:
            raise InvalidPolygonError("Polygon JSON must be an object with a 'vertices' list")
        return cls(data["vertices"], reorient=reorient)

    def to_dict(self) -> Dict[str, Any]:
        return {"vertices": self._vertices.tolist()}

    def __repr__(self) -> str:
        return f"Polygon(n={self.n}, area={self.area:.6g})"

    def __len__(self) -> int:
        return self.n

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    @property
    def n(self) -> int:
        return self._vertices.shape[0]

    def vertex(self, i: int) -> np.ndarray:
        return self._vertices[i % self.n]

    @cached_property
    def area(self) -> float:
        return _signed_area(self._vertices)

    @cached_property
    def edges(self) -> np.ndarray:
        return np.roll(self._vertices, -1, axis=0) - self._vertices

    @cached_property
    def side_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edges, axis=1)

    @cached_property
    def perimeter(self) -> float:
        return math.fsum(self.side_lengths)

    @cached_property
    def tangents(self) -> np.ndarray:
        return self.edges / self.side_lengths[:, None]

    @cached_property
    def normals(self) -> np.ndarray:
        # outward for CCW vertices
        t = self.tangents
        return np.column_stack([t[:, 1], -t[:, 0]])

    @cached_property
    def midpoints(self) -> np.ndarray:
        return self._vertices + 0.5 * self.edges

    @cached_property
    def interior_angles(self) -> np.ndarray:
        return math.pi - _turn_angles(self._vertices)

    @cached_property
    def centroid(self) -> np.ndarray:
        v, w = self._vertices, np.roll(self._vertices, -1, axis=0)
        cross = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        return ((v + w) * cross[:, None]).sum(axis=0) / (6.0 * self.area)

    @cached_property
    def diameter(self) -> float:
        diff = self._vertices[:, None, :] - self._vertices[None, :, :]
        return float(np.sqrt((diff ** 2).sum(axis=2)).max())

    @property
    def is_convex(self) -> bool:
        return bool(np.all(self.interior_angles < math.pi))

    def side(self, i: int) -> SideData:
        i %= self.n
        j = (i + 1) % self.n
        return SideData(
            index=i,
            start=self._vertices[i],
            end=self._vertices[j],
            length=float(self.side_lengths[i]),
            tangent=self.tangents[i],
            normal=self.normals[i],
            midpoint=self.midpoints[i],
            theta_start=float(self.interior_angles[i]),
            theta_end=float(self.interior_angles[j]),
        )

    def sides(self) -> List[SideData]:
        return [self.side(i) for i in range(self.n)]

    def to_shapely(self) -> ShapelyPolygon:
        return ShapelyPolygon(self._vertices)


def side_data(polygon: Polygon) -> List[SideData]:
    return polygon.sides()


def area(polygon: Polygon) -> float:
    return polygon.area


def perimeter(polygon: Polygon) -> float:
    return polygon.perimeter


def psi(theta: float) -> float:
    """cot(theta) + 1/sin(theta), defined on (0, pi)."""
    if not 0.0 < theta < math.pi:
        raise DomainError(f"psi is defined on (0, pi), got {theta}")
    return 1.0 / math.tan(theta) + 1.0 / math.sin(theta)


def half_angle_cot(theta: float) -> float:
    """cot(theta / 2); equals psi on (0, pi) and continues it to reflex angles."""
    if not 0.0 < theta < 2.0 * math.pi:
        raise DomainError(f"interior angle must lie in (0, 2*pi), got {theta}")
    return 1.0 / math.tan(0.5 * theta)


def regular_ngon(n: int, area: float) -> Polygon:
    """Regular n-gon of the given area centred at the origin, vertex 0 on +x."""
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise InvalidArgumentError(f"A regular polygon needs n >= 3, got {n}")
    ok, message = InputValidator.validate_positive(area, "Area")
    if not ok:
        raise InvalidArgumentError(message)
    radius = math.sqrt(2.0 * area / (n * math.sin(2.0 * math.pi / n)))
    angles = 2.0 * math.pi * np.arange(n) / n
    return Polygon(np.column_stack([radius * np.cos(angles), radius * np.sin(angles)]))


@dataclass(frozen=True)
class Translation:
    vector: Tuple[float, float]


@dataclass(frozen=True)
class Rotation:
    angle: float
    center: Tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class Reflection:
    """Reflection across the line through ``point`` with direction ``direction``."""

    direction: Tuple[float, float]
    point: Tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class Scaling:
    factor: float
    center: Tuple[float, float] = (0.0, 0.0)


Motion = Union[Translation, Rotation, Reflection, Scaling]


def transform(polygon: Polygon, motion: Motion) -> Polygon:
    """Apply a rigid motion or a positive dilation vertexwise."""
    v = polygon.vertices
    if isinstance(motion, Translation):
        return Polygon(v + np.asarray(motion.vector, dtype=float))
    if isinstance(motion, Rotation):
        c, s = math.cos(motion.angle), math.sin(motion.angle)
        center = np.asarray(motion.center, dtype=float)
        rotation = np.array([[c, -s], [s, c]])
        return Polygon((v - center) @ rotation.T + center)
    if isinstance(motion, Scaling):
        if not motion.factor > 0:
            raise InvalidArgumentError(f"Scaling factor must be positive, got {motion.factor}")
        center = np.asarray(motion.center, dtype=float)
        return Polygon(center + motion.factor * (v - center))
    if isinstance(motion, Reflection):
        d = np.asarray(motion.direction, dtype=float)
        norm = np.linalg.norm(d)
        if norm == 0:
            raise InvalidArgumentError("Reflection axis direction must be nonzero")
        d = d / norm
        p = np.asarray(motion.point, dtype=float)
        rel = v - p
        mirrored = p + 2.0 * (rel @ d)[:, None] * d[None, :] - rel
        # reflection flips orientation; keep vertex 0 first
        return Polygon(np.concatenate([mirrored[:1], mirrored[:0:-1]]))
    raise InvalidArgumentError(f"Unknown motion {motion!r}")


def diagonal_angles(polygon: Polygon, i: int) -> Tuple[float, float]:
    """Angles (alpha_minus, alpha_plus) the diagonal P_{i-1}P_{i+1} makes with the
    sides at P_{i-1} and P_{i+1} respectively."""
    prev, cur, nxt = polygon.vertex(i - 1), polygon.vertex(i), polygon.vertex(i + 1)

    def angle(u: np.ndarray, w: np.ndarray) -> float:
        return math.atan2(abs(u[0] * w[1] - u[1] * w[0]), float(np.dot(u, w)))

    return angle(cur - prev, nxt - prev), angle(nxt - prev, nxt - cur)


def regular_side_length(n: int, area: float) -> float:
    return math.sqrt(4.0 * area * math.tan(math.pi / n) / n)


def shape_deviation(polygon: Polygon) -> Tuple[float, float]:
    """(max relative side deviation, max angle deviation) from the regular
    polygon with the same vertex count and area."""
    n = polygon.n
    side = regular_side_length(n, polygon.area)
    side_dev = float(np.abs(polygon.side_lengths - side).max() / side)
    angle_dev = float(np.abs(polygon.interior_angles - (n - 2) * math.pi / n).max())
    return side_dev, angle_dev


def shape_signature(polygon: Polygon) -> Dict[str, List[float]]:
    """Sorted side lengths and interior angles; invariant under rigid motions."""
    return {
        "sides": sorted(polygon.side_lengths.tolist()),
        "angles": sorted(polygon.interior_angles.tolist()),
    }


def distance_to_regular(polygon: Polygon) -> float:
    """Hausdorff distance to the closest rigid copy of the same-area regular polygon.

    Both shapes are centred at their centroids and the regular polygon is
    rotated so one of its vertices points at each vertex of ``polygon`` in
    turn; the smallest distance is returned.
    """
    shape = affinity.translate(polygon.to_shapely(), *(-polygon.centroid))
    reference = regular_ngon(polygon.n, polygon.area).to_shapely()
    rel = polygon.vertices - polygon.centroid
    best = math.inf
    for x, y in rel:
        aligned = affinity.rotate(reference, math.atan2(y, x), origin=(0, 0), use_radians=True)
        best = min(best, shape.hausdorff_distance(aligned))
    return float(best)
