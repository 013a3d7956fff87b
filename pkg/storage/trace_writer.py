import csv
import io
from typing import Any, Dict, Iterable, List, Optional, Sequence

from utils.formatting import format_float


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def write_csv(rows: Iterable[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    """CSV text of ``rows``, floats at 17 significant digits.

    Without ``columns`` the header is the union of keys in first-seen order,
    so rows of polygons with different vertex counts still line up.
    """
    rows = list(rows)
    if columns is None:
        seen: List[str] = []
        for row in rows:
            seen.extend(key for key in row if key not in seen)
        columns = seen
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(column)) for column in columns])
    return buffer.getvalue()
