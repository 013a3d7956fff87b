"""Gauss-Legendre building blocks shared by every integral in the package.

Three pieces live here:

* ``gauss_legendre`` / ``hp_rule``: fixed rules on [-1, 1] and geometrically
  graded composite rules on [0, 1] for integrands with an endpoint
  singularity.
* ``AdaptiveGaussLegendre``: a vectorized adaptive bisection integrator that
  advances many independent one-dimensional integrals at once.
* ``Estimate``: a value with an absolute error bound, propagated linearly.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy.special import roots_legendre

from utils.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


@lru_cache(maxsize=128)
def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    if n < 1:
        raise InvalidArgumentError(f"Gauss-Legendre order must be positive, got {n}")
    nodes, weights = roots_legendre(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _graded_left(order: int, levels: int, ratio: float, min_order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = [], []
    # innermost panel first so nodes come out sorted
    x, w = gauss_legendre(min_order)
    width = ratio ** levels
    nodes.append(0.5 * width * (x + 1.0))
    weights.append(0.5 * width * w)
    for k in range(levels - 1, -1, -1):
        lo, hi = ratio ** (k + 1), ratio ** k
        x, w = gauss_legendre(max(min_order, order - k))
        nodes.append(lo + 0.5 * (hi - lo) * (x + 1.0))
        weights.append(0.5 * (hi - lo) * w)
    return np.concatenate(nodes), np.concatenate(weights)


@lru_cache(maxsize=256)
def hp_rule(order: int, levels: int, ratio: float, end: str = "left",
            min_order: int = 2) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule on [0, 1] graded geometrically toward ``end``.

    Panel k (k = 0 is the outermost) is ``[ratio**(k+1), ratio**k]`` and carries
    ``max(min_order, order - k)`` nodes; the innermost panel ``[0, ratio**levels]``
    carries ``min_order``. ``end`` is ``"left"``, ``"right"`` or ``"both"``.
    No node is placed on an endpoint.
    """
    if not 0.0 < ratio < 1.0:
        raise InvalidArgumentError(f"grading ratio must lie in (0, 1), got {ratio}")
    if levels < 0 or order < 1 or min_order < 1:
        raise InvalidArgumentError("hp rule needs levels >= 0 and positive orders")

    if end == "left":
        nodes, weights = _graded_left(order, levels, ratio, min_order)
    elif end == "right":
        x, w = _graded_left(order, levels, ratio, min_order)
        nodes, weights = 1.0 - x[::-1], w[::-1].copy()
    elif end == "both":
        x, w = _graded_left(order, levels, ratio, min_order)
        x, w = 0.5 * x, 0.5 * w
        nodes = np.concatenate([x, 1.0 - x[::-1]])
        weights = np.concatenate([w, w[::-1]])
    else:
        raise InvalidArgumentError(f"unknown grading end '{end}'")

    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@dataclass(frozen=True)
class AdaptiveResult:
    values: np.ndarray
    errors: np.ndarray
    converged: np.ndarray


class AdaptiveGaussLegendre:
    """Adaptive bisection over a batch of integrals.

    ``f(t, rows)`` receives a ``(k, n)`` array of abscissae and the ``(k,)``
    integral indices they belong to, and must return values of shape
    ``(k, n)``. Every integral j has its own interval ``[lo[j], hi[j]]`` and
    absolute error budget ``budget[j]``; a subinterval is accepted once the
    difference between the n-point and the n/2-point rule is below its share
    of the budget (proportional to its width) or the depth limit is hit.
    Integrals that hit the depth limit without meeting the budget are
    reported through ``converged``.
    """

    def __init__(self, nodes: int = 32, max_depth: int = 10):
        if nodes < 2:
            raise InvalidArgumentError(f"adaptive rule needs at least 2 nodes, got {nodes}")
        self.nodes = nodes
        self.max_depth = max_depth
        self._x_hi, self._w_hi = gauss_legendre(nodes)
        self._x_lo, self._w_lo = gauss_legendre(max(1, nodes // 2))

    def integrate(self, f: Callable[[np.ndarray, np.ndarray], np.ndarray],
                  lo: np.ndarray, hi: np.ndarray, budget: np.ndarray) -> AdaptiveResult:
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        budget = np.broadcast_to(np.asarray(budget, dtype=float), lo.shape)
        m = lo.size

        values = np.zeros(m)
        errors = np.zeros(m)
        converged = np.ones(m, dtype=bool)
        total_width = hi - lo

        owner = np.nonzero(total_width > 0.0)[0]
        a, b = lo[owner], hi[owner]
        depth = np.zeros(owner.size, dtype=int)

        while owner.size:
            mid = 0.5 * (a + b)
            half = 0.5 * (b - a)
            t_hi = mid[:, None] + half[:, None] * self._x_hi[None, :]
            t_lo = mid[:, None] + half[:, None] * self._x_lo[None, :]
            q_hi = half * (f(t_hi, owner) * self._w_hi).sum(axis=1)
            q_lo = half * (f(t_lo, owner) * self._w_lo).sum(axis=1)
            err = np.abs(q_hi - q_lo)

            allowed = budget[owner] * (b - a) / total_width[owner]
            ok = err <= allowed
            accept = ok | (depth >= self.max_depth) | ~np.isfinite(err)
            converged[owner[accept & ~ok]] = False

            np.add.at(values, owner[accept], q_hi[accept])
            np.add.at(errors, owner[accept], err[accept])

            keep = ~accept
            if keep.any():
                logger.debug(f"Bisecting {int(keep.sum())} intervals at depth {int(depth[keep].max()) + 1}")
            owner = np.concatenate([owner[keep], owner[keep]])
            a, b, m_k = a[keep], b[keep], mid[keep]
            a, b = np.concatenate([a, m_k]), np.concatenate([m_k, b])
            depth = np.concatenate([depth[keep], depth[keep]]) + 1

        return AdaptiveResult(values=values, errors=errors, converged=converged)


@dataclass(frozen=True)
class Estimate:
    """A numerical value together with an absolute error bound."""

    value: float
    error: float = 0.0

    def __add__(self, other):
        if isinstance(other, Estimate):
            return Estimate(self.value + other.value, self.error + other.error)
        return Estimate(self.value + float(other), self.error)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Estimate):
            return Estimate(self.value - other.value, self.error + other.error)
        return Estimate(self.value - float(other), self.error)

    def __rsub__(self, other):
        return Estimate(float(other) - self.value, self.error)

    def __mul__(self, scalar: float):
        scalar = float(scalar)
        return Estimate(self.value * scalar, self.error * abs(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float):
        scalar = float(scalar)
        return Estimate(self.value / scalar, self.error / abs(scalar))

    def __neg__(self):
        return Estimate(-self.value, self.error)

    def __float__(self):
        return float(self.value)

    def __iter__(self):
        yield self.value
        yield self.error

    @staticmethod
    def fsum(items) -> "Estimate":
        items = list(items)
        return Estimate(math.fsum(e.value for e in items), math.fsum(e.error for e in items))

    def as_dict(self):
        return {"value": self.value, "error": self.error}
