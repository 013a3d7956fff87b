import math
from typing import Any, Sequence, Tuple

import numpy as np


class InputValidator:
    """Validation utilities for user supplied numerical input.

    Each check returns ``(is_valid, message)``; callers decide which error
    to raise.
    """

    @staticmethod
    def validate_vertices(vertices: Any) -> Tuple[bool, str]:
        """Validate a raw vertex list before it becomes a polygon"""
        try:
            array = np.asarray(vertices, dtype=float)
        except (TypeError, ValueError):
            return False, "Vertices must be a list of [x, y] pairs of numbers"

        if array.ndim != 2 or array.shape[1] != 2:
            return False, "Vertices must be a list of [x, y] pairs"

        if array.shape[0] < 3:
            return False, f"A polygon needs at least 3 vertices, got {array.shape[0]}"

        if not np.all(np.isfinite(array)):
            return False, "Vertex coordinates must be finite"

        return True, "Valid"

    @staticmethod
    def validate_alpha(alpha: float) -> Tuple[bool, str]:
        if not isinstance(alpha, (int, float)) or not math.isfinite(alpha):
            return False, "Riesz exponent must be a finite number"
        if not 0.0 < alpha < 2.0:
            return False, f"Riesz exponent must lie in (0, 2), got {alpha}"
        return True, "Valid exponent"

    @staticmethod
    def validate_delta(delta: float) -> Tuple[bool, str]:
        if not isinstance(delta, (int, float)) or not math.isfinite(delta):
            return False, "Regularization shift must be a finite number"
        if delta <= 0.0:
            return False, f"Regularization shift must be positive, got {delta}"
        return True, "Valid shift"

    @staticmethod
    def validate_tolerance(tolerance: float) -> Tuple[bool, str]:
        if not isinstance(tolerance, (int, float)) or not math.isfinite(tolerance):
            return False, "Tolerance must be a finite number"
        if not 0.0 < tolerance < 1e-2:
            return False, f"Tolerance must lie in (0, 1e-2), got {tolerance}"
        return True, "Valid tolerance"

    @staticmethod
    def validate_point(point: Sequence[float]) -> Tuple[bool, str]:
        try:
            array = np.asarray(point, dtype=float)
        except (TypeError, ValueError):
            return False, "Point must be two numbers"
        if array.shape != (2,):
            return False, "Point must have exactly two coordinates"
        if not np.all(np.isfinite(array)):
            return False, "Point coordinates must be finite"
        return True, "Valid point"

    @staticmethod
    def validate_index(index: int, count: int, what: str = "side") -> Tuple[bool, str]:
        """Validate a 1-based index as used in JSON and on the command line"""
        if not isinstance(index, int) or isinstance(index, bool):
            return False, f"{what.capitalize()} index must be an integer"
        if not 1 <= index <= count:
            return False, f"{what.capitalize()} index must lie in 1..{count}, got {index}"
        return True, "Valid index"

    @staticmethod
    def validate_positive(value: float, name: str) -> Tuple[bool, str]:
        if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
            return False, f"{name} must be a positive number, got {value}"
        return True, "Valid"
