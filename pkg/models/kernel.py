"""Radial interaction kernels and their radial primitives M(R) = int_0^R K(r) r dr."""
import logging
import math
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from utils.errors import AccuracyError, DomainError, InvalidArgumentError
from utils.quadrature import AdaptiveGaussLegendre, gauss_legendre
from utils.validation import InputValidator

logger = logging.getLogger(__name__)

SAMPLE_GRID = np.logspace(-8, 3, 64)

PRIMITIVE_RTOL = 1e-12

# geometric panels on (0, 1] for R^2 int_0^1 K(R u) u du
_PRIMITIVE_RATIO = 0.25
_PRIMITIVE_LEVELS = 24
_PRIMITIVE_STEP = 8
_PRIMITIVE_MAX_LEVELS = 160
_PRIMITIVE_NODES = 16
_PRIMITIVE_DEPTH = 12


class Kernel(ABC):
    """Nonnegative, strictly decreasing radial kernel K(r), r > 0.

    ``value``, ``derivative`` and ``radial_primitive`` are vectorized and do
    no argument checking; ``eval`` and ``eval_deriv`` are the checked scalar
    entry points.
    """

    regular_at_zero = False

    @abstractmethod
    def value(self, r: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def derivative(self, r: np.ndarray) -> np.ndarray:
        ...

    def radial_primitive(self, R: np.ndarray) -> np.ndarray:
        return numeric_primitive(self, R)

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        ...

    def _check_radius(self, r: float) -> float:
        r = float(r)
        if not math.isfinite(r):
            raise DomainError(f"kernel argument must be finite, got {r}")
        if r < 0 or (r == 0 and not self.regular_at_zero):
            raise DomainError(f"kernel argument must be positive, got {r}")
        return r

    def eval(self, r: float) -> float:
        return float(self.value(np.asarray(self._check_radius(r))))

    def eval_deriv(self, r: float) -> float:
        return float(self.derivative(np.asarray(self._check_radius(r))))

    def primitive(self, R: float) -> float:
        R = float(R)
        if not R >= 0:
            raise DomainError(f"radial primitive needs R >= 0, got {R}")
        return float(self.radial_primitive(np.asarray([R]))[0])

    def verify_assumptions(self) -> Tuple[bool, str]:
        """Sampled check of K >= 0, K' < 0 where K > 0 and finite M(1)."""
        k = self.value(SAMPLE_GRID)
        dk = self.derivative(SAMPLE_GRID)
        if not np.all(np.isfinite(k)) or not np.all(np.isfinite(dk)):
            return False, "Kernel or derivative is not finite on the sample grid"
        if np.any(k < 0):
            return False, f"Kernel is negative at r = {SAMPLE_GRID[np.argmax(k < 0)]:.3g}"
        bad = (k > 0) & (dk >= 0)
        if bad.any():
            return False, f"Kernel is not strictly decreasing at r = {SAMPLE_GRID[np.argmax(bad)]:.3g}"
        try:
            m1 = self.radial_primitive(np.array([1.0]))[0]
        except AccuracyError as e:
            logger.warning(f"M(1) only known to {e.error_bound:.3g}: {e.message}")
            m1 = e.estimate
        if not math.isfinite(m1):
            return False, "int_0^1 K(r) r dr is not finite"
        return True, "Valid kernel"


def _power_tail(kernel: Kernel, R: np.ndarray, eps: float) -> Tuple[np.ndarray, np.ndarray]:
    """int_0^eps K(R u) u du taking K as a power of r below R eps, and the local exponent s."""
    r = R * eps
    k = kernel.value(r)
    s = r * kernel.derivative(r) / np.where(k > 0, k, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(2.0 + s > 0, eps * eps * k / (2.0 + s), np.inf)
    return tail, s


def _panel_integrals(kernel: Kernel, R: np.ndarray, first: int, last: int,
                     integrator: AdaptiveGaussLegendre, rtol: float) -> Tuple[np.ndarray, np.ndarray]:
    """Adaptive integrals of K(R u) u over the panels [ratio^(k+1), ratio^k], first <= k < last.

    Returns ``(len(R), last - first)`` arrays of values and error bounds; each
    panel gets a quarter of ``rtol`` relative to its own size.
    """
    k = np.arange(first, last)
    lo = np.tile(_PRIMITIVE_RATIO ** (k + 1.0), R.size)
    hi = np.tile(_PRIMITIVE_RATIO ** k.astype(float), R.size)
    owner = np.repeat(R, k.size)

    def integrand(t, rows):
        return kernel.value(owner[rows][:, None] * t) * t

    x, w = gauss_legendre(_PRIMITIVE_NODES)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    coarse = half * (integrand(mid[:, None] + half[:, None] * x, np.arange(lo.size)) * w).sum(axis=1)
    budget = np.maximum(0.25 * rtol * np.abs(coarse), np.finfo(float).tiny)
    result = integrator.integrate(integrand, lo, hi, budget)
    shape = (R.size, k.size)
    return result.values.reshape(shape), result.errors.reshape(shape)


def numeric_primitive(kernel: Kernel, R: np.ndarray, rtol: float = PRIMITIVE_RTOL) -> np.ndarray:
    """M(R) = R^2 int_0^1 K(R u) u du to relative tolerance ``rtol``.

    Geometric panels toward u = 0 are integrated adaptively. Below the
    innermost panel K is continued as a local power law; the error of that
    continuation is read off from how well it predicts the innermost panel,
    and panels are added until body and tail together meet ``rtol``.
    Divergent kernels give ``inf``.
    """
    R = np.asarray(R, dtype=float)
    flat = R.reshape(-1)
    out = np.zeros_like(flat)
    positive = np.nonzero(flat > 0)[0]
    if positive.size == 0:
        return out.reshape(R.shape)

    Rp = flat[positive]
    integrator = AdaptiveGaussLegendre(_PRIMITIVE_NODES, _PRIMITIVE_DEPTH)
    values, errors = _panel_integrals(kernel, Rp, 0, _PRIMITIVE_LEVELS, integrator, rtol)
    body, body_err, innermost = values.sum(axis=1), errors.sum(axis=1), values[:, -1]
    result = np.empty(Rp.size)
    active = np.arange(Rp.size)
    levels = _PRIMITIVE_LEVELS

    while True:
        eps = _PRIMITIVE_RATIO ** levels
        r_act = Rp[active]
        tail, s = _power_tail(kernel, r_act, eps)
        outer_tail, _ = _power_tail(kernel, r_act, eps / _PRIMITIVE_RATIO)
        q = _PRIMITIVE_RATIO ** np.clip(2.0 + s, 1e-300, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail_err = np.abs(outer_tail - innermost[active] - tail) * q / (1.0 - q)
            total = body[active] + tail
            error = body_err[active] + tail_err
            done = (error <= rtol * np.abs(total)) | np.isposinf(total)
        result[active[done]] = total[done]
        if done.all():
            break
        active, total, error = active[~done], total[~done], error[~done]
        if levels >= _PRIMITIVE_MAX_LEVELS or not np.all(np.isfinite(kernel.value(Rp[active] * eps))):
            worst = int(np.argmax(error / np.abs(total)))
            raise AccuracyError(
                f"Radial primitive of {kernel!r} at R = {Rp[active][worst]:.6g} reached relative error "
                f"{error[worst] / abs(total[worst]):.3g} after {levels} panels (target {rtol:g})",
                estimate=float(Rp[active][worst] ** 2 * total[worst]),
                error_bound=float(Rp[active][worst] ** 2 * error[worst]),
            )
        values, errors = _panel_integrals(kernel, Rp[active], levels, levels + _PRIMITIVE_STEP, integrator, rtol)
        body[active] += values.sum(axis=1)
        body_err[active] += errors.sum(axis=1)
        innermost[active] = values[:, -1]
        logger.debug(f"Radial primitive: {active.size} radii extended to {levels + _PRIMITIVE_STEP} panels")
        levels += _PRIMITIVE_STEP

    out[positive] = Rp ** 2 * result
    return out.reshape(R.shape)


class RieszKernel(Kernel):
    """K(r) = r**(-alpha), 0 < alpha < 2."""

    def __init__(self, alpha: float):
        ok, message = InputValidator.validate_alpha(alpha)
        if not ok:
            raise InvalidArgumentError(message)
        self.alpha = float(alpha)

    def value(self, r):
        return np.power(r, -self.alpha)

    def derivative(self, r):
        return -self.alpha * np.power(r, -self.alpha - 1.0)

    def radial_primitive(self, R):
        R = np.asarray(R, dtype=float)
        return np.power(R, 2.0 - self.alpha) / (2.0 - self.alpha)

    def describe(self):
        return {"type": "riesz", "alpha": self.alpha}

    def __repr__(self):
        return f"RieszKernel(alpha={self.alpha})"


class ShiftedKernel(Kernel):
    """K_delta(r) = K(r + delta): a kernel made bounded at the origin."""

    regular_at_zero = True

    def __init__(self, base: Kernel, delta: float):
        ok, message = InputValidator.validate_delta(delta)
        if not ok:
            raise InvalidArgumentError(message)
        self.base = base
        self.delta = float(delta)

    def value(self, r):
        return self.base.value(np.asarray(r, dtype=float) + self.delta)

    def derivative(self, r):
        return self.base.derivative(np.asarray(r, dtype=float) + self.delta)

    def describe(self):
        return {"type": "shifted", "delta": self.delta, "base": self.base.describe()}

    def __repr__(self):
        return f"ShiftedKernel({self.base!r}, delta={self.delta})"


class RegularizedRieszKernel(ShiftedKernel):
    """K(r) = (r + delta)**(-alpha) with a closed-form radial primitive."""

    def __init__(self, alpha: float, delta: float):
        super().__init__(RieszKernel(alpha), delta)
        self.alpha = float(alpha)

    def radial_primitive(self, R):
        R = np.asarray(R, dtype=float)
        a, d = self.alpha, self.delta
        log_ratio = np.log1p(R / d)
        first = d ** (2.0 - a) * np.expm1((2.0 - a) * log_ratio) / (2.0 - a)
        if abs(1.0 - a) < 1e-12:
            second = d * log_ratio
        else:
            second = d * d ** (1.0 - a) * np.expm1((1.0 - a) * log_ratio) / (1.0 - a)
        return first - second

    def describe(self):
        return {"type": "regularized_riesz", "alpha": self.alpha, "delta": self.delta}

    def __repr__(self):
        return f"RegularizedRieszKernel(alpha={self.alpha}, delta={self.delta})"


class CustomKernel(Kernel):
    """User supplied K and K'; M is integrated numerically unless given.

    The callables must accept numpy arrays.
    """

    def __init__(self, k: Callable, dk: Callable, primitive: Optional[Callable] = None,
                 name: str = "custom", regular_at_zero: bool = False):
        self._k = k
        self._dk = dk
        self._primitive = primitive
        self.name = name
        self.regular_at_zero = regular_at_zero
        ok, message = self.verify_assumptions()
        if not ok:
            raise InvalidArgumentError(f"Kernel '{name}' rejected: {message}")

    def value(self, r):
        return np.asarray(self._k(np.asarray(r, dtype=float)), dtype=float)

    def derivative(self, r):
        return np.asarray(self._dk(np.asarray(r, dtype=float)), dtype=float)

    def radial_primitive(self, R):
        if self._primitive is None:
            return numeric_primitive(self, R)
        return np.asarray(self._primitive(np.asarray(R, dtype=float)), dtype=float)

    def describe(self):
        return {"type": "custom", "name": self.name, "primitive": "closed" if self._primitive else "numeric"}

    def __repr__(self):
        return f"CustomKernel(name={self.name!r})"
