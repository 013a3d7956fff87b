import json
import math
import re
import uuid
from typing import Any, List

import numpy as np


def format_float(value: float) -> str:
    """Float literal at 17 significant digits; non-finite values use the JavaScript names."""
    value = float(value)
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return format(value, ".17g")


def _normalize(obj: Any, floats: List[str], marker: str) -> Any:
    if isinstance(obj, dict):
        return {str(key): _normalize(value, floats, marker) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(value, floats, marker) for value in obj]
    if isinstance(obj, np.ndarray):
        return [_normalize(value, floats, marker) for value in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        floats.append(format_float(obj))
        return f"{marker}:{len(floats) - 1}"
    return obj


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with every float written at 17 significant digits.

    Floats travel through ``json.dumps`` as marker strings unique to the call
    and are substituted afterwards.
    """
    floats: List[str] = []
    marker = f"float-{uuid.uuid4().hex}"
    text = json.dumps(_normalize(obj, floats, marker), indent=indent)
    return re.sub(f'"{marker}:(\\d+)"', lambda match: floats[int(match.group(1))], text)
