"""Potential v_P(x) = int_P K(|x - y|) dy and its weighted integrals along sides.

The potential is evaluated by a signed fan decomposition: each edge (A, B)
together with the evaluation point x spans a triangle whose contribution is
``sign * int M(R(t)) dt``, where R(t) is the distance from x to the edge line
along the ray at angle t and M is the kernel's radial primitive. The
singularity at y = x is absorbed by M, so points on the boundary need no
special treatment.

Along each edge the angular integral is split at ``|s| = FAN_SPLIT * h`` (s is
the coordinate along the edge measured from the foot of the perpendicular,
h the distance to the edge line): the central piece is integrated in the
angle, the two tails in ``w = log(|s| / h)``. Both integrands stay smooth
however close x is to the edge.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from models.kernel import Kernel
from models.polygon import Polygon
from models.schemas import QuadratureSpec
from utils.errors import AccuracyError, InvalidArgumentError
from utils.parallel import ChunkedExecutor
from utils.quadrature import AdaptiveGaussLegendre, Estimate, hp_rule
from utils.validation import InputValidator

logger = logging.getLogger(__name__)

FAN_SPLIT = 4.0
DEGENERATE_HEIGHT = 1e-14

_CENTRAL, _TAIL = 0, 1


@dataclass(frozen=True)
class SideIntegrals:
    """Weighted integrals of v_P along one side.

    ``first_half`` / ``second_half`` are int v |x - M_i| over [P_i, M_i] and
    [M_i, P_{i+1}]; ``start_moment`` / ``end_moment`` are int v |x - P_i| and
    int v |x - P_{i+1}| over the whole side.
    """

    index: int
    length: float
    total: Estimate
    first_half: Estimate
    second_half: Estimate
    start_moment: Estimate
    end_moment: Estimate

    @property
    def mean(self) -> Estimate:
        return self.total / self.length


def potential_bound(kernel: Kernel, area: float) -> float:
    """Uniform bound 2 pi M(1) + K(1) |P| on the potential of a set of area |P|."""
    return 2.0 * math.pi * kernel.primitive(1.0) + kernel.eval(1.0) * area


class PotentialEvaluator:
    def __init__(self, polygon: Polygon, kernel: Kernel, spec: Optional[QuadratureSpec] = None,
                 executor: Optional[ChunkedExecutor] = None):
        self.polygon = polygon
        self.kernel = kernel
        self.spec = spec or QuadratureSpec()
        self.executor = executor or ChunkedExecutor()
        self.logger = logging.getLogger(__name__)
        self._integrator = AdaptiveGaussLegendre(self.spec.angular_nodes, self.spec.max_subdivision_depth)
        self._starts = polygon.vertices
        self._tangents = polygon.tangents
        self._lengths = polygon.side_lengths
        self._sides: Optional[List[SideIntegrals]] = None

    def evaluate(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Potential values and absolute error bounds at an ``(m, 2)`` array of points."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != 2 or not np.all(np.isfinite(points)):
            raise InvalidArgumentError("Evaluation points must be finite 2D coordinates")
        out = self.executor.map_array(self._evaluate_chunk, points)
        return out[:, 0], out[:, 1]

    def estimate(self, point: Sequence[float]) -> Estimate:
        ok, message = InputValidator.validate_point(point)
        if not ok:
            raise InvalidArgumentError(message)
        values, errors = self.evaluate(np.asarray(point, dtype=float)[None, :])
        return Estimate(float(values[0]), float(errors[0]))

    def _evaluate_chunk(self, x: np.ndarray) -> np.ndarray:
        m, n = x.shape[0], self.polygon.n
        if m == 0:
            return np.zeros((0, 2))

        rel = x[:, None, :] - self._starts[None, :, :]
        u = self._tangents[None, :, :]
        along = (rel * u).sum(axis=2)
        h_signed = u[..., 0] * rel[..., 1] - u[..., 1] * rel[..., 0]
        dist = np.linalg.norm(rel, axis=2)
        h = np.abs(h_signed)
        s_a = -along
        s_b = self._lengths[None, :] - along
        degenerate = h <= DEGENERATE_HEIGHT * (self._lengths[None, :] + dist)
        h_safe = np.where(degenerate, 1.0, h)
        split = FAN_SPLIT * h_safe

        scale = 2.0 * math.pi * self.kernel.radial_primitive(dist.max(axis=1))
        point_budget = self.spec.tolerance * scale
        piece_budget = np.repeat(point_budget / (3 * n), n).reshape(m, n)

        pieces = []
        c_lo, c_hi = np.maximum(s_a, -split), np.minimum(s_b, split)
        mask = ~degenerate & (c_hi > c_lo)
        pieces.append((mask, np.arctan(c_lo / h_safe), np.arctan(c_hi / h_safe), _CENTRAL))

        mask = ~degenerate & (s_b > split)
        t_lo = np.log(np.maximum(s_a, split) / h_safe, where=mask, out=np.zeros_like(h))
        t_hi = np.log(s_b / h_safe, where=mask, out=np.zeros_like(h))
        pieces.append((mask, t_lo, t_hi, _TAIL))

        mask = ~degenerate & (s_a < -split)
        t_lo = np.log(np.maximum(-s_b, split) / h_safe, where=mask, out=np.zeros_like(h))
        t_hi = np.log(-s_a / h_safe, where=mask, out=np.zeros_like(h))
        pieces.append((mask, t_lo, t_hi, _TAIL))

        owner, lo, hi, kind, height, sign, budget = [], [], [], [], [], [], []
        point_index = np.repeat(np.arange(m), n).reshape(m, n)
        for mask, p_lo, p_hi, p_kind in pieces:
            owner.append(point_index[mask])
            lo.append(p_lo[mask])
            hi.append(p_hi[mask])
            kind.append(np.full(int(mask.sum()), p_kind))
            height.append(h_safe[mask])
            sign.append(np.sign(h_signed[mask]))
            budget.append(piece_budget[mask])
        owner, lo, hi = np.concatenate(owner), np.concatenate(lo), np.concatenate(hi)
        kind, height = np.concatenate(kind), np.concatenate(height)
        sign, budget = np.concatenate(sign), np.concatenate(budget)

        primitive = self.kernel.radial_primitive

        def integrand(t: np.ndarray, rows: np.ndarray) -> np.ndarray:
            hh = height[rows][:, None]
            out = np.empty_like(t)
            central = kind[rows] == _CENTRAL
            if central.any():
                out[central] = primitive(hh[central] / np.cos(t[central]))
            tail = ~central
            if tail.any():
                ht = hh[tail]
                s = ht * np.exp(t[tail])
                out[tail] = primitive(np.hypot(ht, s)) * ht * s / (ht * ht + s * s)
            return out

        result = self._integrator.integrate(integrand, lo, hi, budget)
        values = np.bincount(owner, weights=sign * result.values, minlength=m)
        errors = np.bincount(owner, weights=result.errors, minlength=m)

        bad = ~np.isfinite(values) | ~np.isfinite(errors)
        bad |= np.bincount(owner, weights=(~result.converged).astype(float), minlength=m) > 0
        if bad.any():
            k = int(np.argmax(bad))
            self.logger.error(f"Potential quadrature failed at point {x[k].tolist()}")
            raise AccuracyError(
                f"Potential quadrature did not converge at x = {x[k].tolist()}",
                estimate=float(values[k]),
                error_bound=float(errors[k]),
            )
        return np.column_stack([values, errors])

    def side_integrals(self) -> List[SideIntegrals]:
        """Integrals of v_P along every side, computed once and cached."""
        if self._sides is None:
            self._sides = self._compute_side_integrals()
        return self._sides

    def _line_rules(self):
        spec = self.spec
        high = hp_rule(spec.line_nodes, spec.grading_levels, spec.grading_ratio, "left")
        low = hp_rule(max(2, spec.line_nodes // 2), spec.grading_levels, spec.grading_ratio, "left")
        return high, low

    def _compute_side_integrals(self) -> List[SideIntegrals]:
        polygon = self.polygon
        rules = self._line_rules()

        blocks = []
        for u, w in rules:
            for i in range(polygon.n):
                half = 0.5 * self._lengths[i]
                d = half * u
                start, end, tangent = polygon.vertex(i), polygon.vertex(i + 1), self._tangents[i]
                blocks.append(start + d[:, None] * tangent)
                blocks.append(end - d[:, None] * tangent)
        points = np.concatenate(blocks)
        values, errors = self.evaluate(points)

        results = []
        offset = 0
        samples = {}
        for r, (u, w) in enumerate(rules):
            k = u.size
            for i in range(polygon.n):
                va, ea = values[offset:offset + k], errors[offset:offset + k]
                vb, eb = values[offset + k:offset + 2 * k], errors[offset + k:offset + 2 * k]
                offset += 2 * k
                samples[(r, i)] = (u, w, va, ea, vb, eb)

        for i in range(polygon.n):
            length = float(self._lengths[i])
            quantities = {}
            for name in ("total", "first_half", "second_half", "start_moment", "end_moment"):
                estimates = []
                for r in range(2):
                    u, w, va, ea, vb, eb = samples[(r, i)]
                    ca, cb = _side_weights(name, u, w, length)
                    value = math.fsum(ca * va) + math.fsum(cb * vb)
                    spread = math.fsum(np.abs(ca) * ea) + math.fsum(np.abs(cb) * eb)
                    estimates.append((value, spread))
                (high, high_err), (low, _) = estimates
                quantities[name] = Estimate(high, abs(high - low) + high_err)
            results.append(SideIntegrals(index=i, length=length, **quantities))

        self.logger.debug(f"Side integrals computed on {polygon.n} sides from {points.shape[0]} potential samples")
        return results


def _side_weights(name: str, u: np.ndarray, w: np.ndarray, length: float) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients of a side functional on the two half-side node sets.

    Half a runs from P_i, half b from P_{i+1}; ``d`` is the distance to that
    half's own vertex.
    """
    half = 0.5 * length
    d = half * u
    weights = half * w
    zero = np.zeros_like(weights)
    if name == "total":
        return weights, weights
    if name == "first_half":
        return weights * (half - d), zero
    if name == "second_half":
        return zero, weights * (half - d)
    if name == "start_moment":
        return weights * d, weights * (length - d)
    if name == "end_moment":
        return weights * (length - d), weights * d
    raise InvalidArgumentError(f"Unknown side functional '{name}'")


def _side(polygon: Polygon, kernel: Kernel, i: int, spec: Optional[QuadratureSpec]) -> SideIntegrals:
    if not isinstance(i, (int, np.integer)):
        raise InvalidArgumentError(f"Side index must be an integer, got {i!r}")
    return PotentialEvaluator(polygon, kernel, spec).side_integrals()[i % polygon.n]


def potential_at(polygon: Polygon, kernel: Kernel, x: Sequence[float],
                 spec: Optional[QuadratureSpec] = None) -> float:
    return PotentialEvaluator(polygon, kernel, spec).estimate(x).value


def side_mean_potential(polygon: Polygon, kernel: Kernel, i: int,
                        spec: Optional[QuadratureSpec] = None) -> float:
    return _side(polygon, kernel, i, spec).mean.value


def side_half_moment(polygon: Polygon, kernel: Kernel, i: int, half: str,
                     spec: Optional[QuadratureSpec] = None) -> float:
    sides = _side(polygon, kernel, i, spec)
    if half == "first":
        return sides.first_half.value
    if half == "second":
        return sides.second_half.value
    raise InvalidArgumentError(f"half must be 'first' or 'second', got {half!r}")


def side_vertex_moment(polygon: Polygon, kernel: Kernel, i: int, anchor: int,
                       spec: Optional[QuadratureSpec] = None) -> float:
    """int over side i of v_P(x) |x - P_anchor|; anchor is vertex i or i + 1."""
    n = polygon.n
    if anchor % n == i % n:
        return _side(polygon, kernel, i, spec).start_moment.value
    if anchor % n == (i + 1) % n:
        return _side(polygon, kernel, i, spec).end_moment.value
    raise InvalidArgumentError(f"Vertex {anchor} is not an endpoint of side {i}")
