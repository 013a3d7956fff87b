from typing import Any, Dict, Optional


class PolyRieszError(Exception):
    """Base class for all library failures.

    Each subclass carries a machine-readable ``code`` and the process exit
    code the command line front end reports for it.
    """

    code = "error"
    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        payload = {"error": self.code, "exit_code": self.exit_code, "message": self.message}
        payload.update(self.details)
        return payload


class InvalidArgumentError(PolyRieszError, ValueError):
    code = "invalid-argument"
    exit_code = 3


class InvalidPolygonError(InvalidArgumentError):
    code = "invalid-polygon"


class DomainError(PolyRieszError, ValueError):
    code = "domain"
    exit_code = 3


class UnsupportedInputError(PolyRieszError):
    code = "unsupported-input"
    exit_code = 3


class RangeError(PolyRieszError, ValueError):
    """Flow parameter outside the range where the perturbed polygon stays simple."""

    code = "range"
    exit_code = 3


class AccuracyError(PolyRieszError, ArithmeticError):
    """Quadrature did not reach its error budget."""

    code = "accuracy"
    exit_code = 4

    def __init__(self, message: str, estimate: float = float("nan"),
                 error_bound: float = float("inf"), **details: Any):
        super().__init__(message, estimate=estimate, error_bound=error_bound, **details)
        self.estimate = estimate
        self.error_bound = error_bound


class OptimizationError(PolyRieszError):
    code = "optimization"
    exit_code = 5

    def __init__(self, message: str, trace: Optional[list] = None, **details: Any):
        super().__init__(message, **details)
        self.trace = trace or []


class UsageError(PolyRieszError):
    """Malformed command line."""

    code = "usage"
    exit_code = 2
