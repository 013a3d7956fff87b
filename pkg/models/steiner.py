import logging
from typing import Sequence, Tuple

import numpy as np

from models.polygon import GEOMETRY_TOL, Polygon
from utils.errors import InvalidArgumentError, UnsupportedInputError

logger = logging.getLogger(__name__)


def _frame(direction: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    u = np.asarray(direction, dtype=float)
    if u.shape != (2,) or not np.all(np.isfinite(u)):
        raise InvalidArgumentError("Symmetrization direction must be a finite 2D vector")
    norm = float(np.hypot(u[0], u[1]))
    if norm == 0.0:
        raise InvalidArgumentError("Symmetrization direction must be nonzero")
    u = u / norm
    # right-handed: det[e1, e2] = 1
    return np.array([u[1], -u[0]]), u


def _slice_extent(coords: np.ndarray, b: float, tol: float) -> Tuple[float, float]:
    """Lowest and highest x2 where the line x1 = b meets the boundary."""
    a, c = coords, np.roll(coords, -1, axis=0)
    lo_x, hi_x = np.minimum(a[:, 0], c[:, 0]), np.maximum(a[:, 0], c[:, 0])
    hits = []
    for k in np.nonzero((lo_x <= b + tol) & (hi_x >= b - tol))[0]:
        (ax, ay), (cx, cy) = a[k], c[k]
        if abs(cx - ax) <= tol:
            hits.extend([ay, cy])
        else:
            s = min(1.0, max(0.0, (b - ax) / (cx - ax)))
            hits.append(ay + s * (cy - ay))
    return min(hits), max(hits)


def _drop_degenerate(points: np.ndarray, tol: float) -> np.ndarray:
    changed = True
    pts = list(points)
    while changed and len(pts) > 3:
        changed = False
        for k in range(len(pts)):
            prev, cur, nxt = pts[k - 1], pts[k], pts[(k + 1) % len(pts)]
            d1, d2 = cur - prev, nxt - cur
            if np.linalg.norm(d2) <= tol or abs(d1[0] * d2[1] - d1[1] * d2[0]) <= tol * max(tol, np.linalg.norm(d1) * np.linalg.norm(d2)):
                del pts[k]
                changed = True
                break
    return np.array(pts)


def _symmetrize_slices(polygon: Polygon, direction: Sequence[float]) -> Polygon:
    """Steiner symmetral for polygons whose lines parallel to ``direction``
    meet them in a single interval (or not at all)."""
    e1, e2 = _frame(direction)
    basis = np.column_stack([e1, e2])
    coords = polygon.vertices @ basis
    scale = max(1.0, float(np.abs(coords).max()))
    tol = GEOMETRY_TOL * scale
    center = float(polygon.centroid @ e2)

    breaks = []
    for b in np.sort(coords[:, 0]):
        if not breaks or b - breaks[-1] > tol:
            breaks.append(float(b))

    lower, upper = [], []
    for b in breaks:
        lo, hi = _slice_extent(coords, b, tol)
        half = 0.5 * max(0.0, hi - lo)
        if half <= tol:
            lower.append((b, center))
            upper.append((b, center))
        else:
            lower.append((b, center - half))
            upper.append((b, center + half))

    ring = np.array(lower + upper[::-1])
    keep = [0]
    for k in range(1, len(ring)):
        if np.linalg.norm(ring[k] - ring[keep[-1]]) > tol:
            keep.append(k)
    ring = ring[keep]
    if np.linalg.norm(ring[-1] - ring[0]) <= tol:
        ring = ring[:-1]
    ring = _drop_degenerate(ring, tol)

    return Polygon(ring @ basis.T)


def steiner_symmetrize(polygon: Polygon, direction: Sequence[float]) -> Polygon:
    """Replace every chord parallel to ``direction`` by the chord of equal
    length centred on the line through the centroid perpendicular to it.

    The result is symmetric under reflection across that line and has the
    same area. Only convex input is accepted.
    """
    if not polygon.is_convex:
        raise UnsupportedInputError(
            "Steiner symmetrization is only defined here for convex polygons; "
            "symmetrize nonconvex quadrilaterals across their interior diagonal first"
        )
    result = _symmetrize_slices(polygon, direction)
    logger.debug(f"Symmetrized {polygon.n}-gon along {tuple(direction)} into {result.n}-gon")
    return result


def interior_diagonal(polygon: Polygon) -> Tuple[int, int]:
    """Vertex indices of the diagonal of a quadrilateral that lies inside it."""
    if polygon.n != 4:
        raise UnsupportedInputError(f"Interior diagonal is defined for quadrilaterals, got {polygon.n} vertices")
    reflex = np.nonzero(polygon.interior_angles > np.pi)[0]
    if reflex.size:
        r = int(reflex[0])
        return min(r, (r + 2) % 4), max(r, (r + 2) % 4)
    return 0, 2


def symmetrize_interior_diagonal(polygon: Polygon) -> Polygon:
    """Symmetrize a quadrilateral along its interior diagonal.

    Lines parallel to the interior diagonal meet even a nonconvex
    quadrilateral in one interval, so the result is a convex kite.
    """
    a, b = interior_diagonal(polygon)
    direction = polygon.vertex(b) - polygon.vertex(a)
    return _symmetrize_slices(polygon, direction)
