"""
Flat key=value text blocks for results and calibration files.
"""

import math
from enum import Enum
from typing import Any, Iterable

from squeezelab.exceptions import InputDataError


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def format_key_values(values: dict[str, Any]) -> str:
    """One `key=value` per line; None values are skipped."""
    lines = [f"{key}={format_value(value)}" for key, value in values.items() if value is not None]
    return "\n".join(lines) + "\n"


def parse_key_values(lines: Iterable[str]) -> dict[str, str]:
    """Inverse of format_key_values; blank lines and '#' comments are ignored."""
    values: dict[str, str] = {}
    for line_number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputDataError(f"line {line_number}: expected key=value, got {raw!r}", [line_number])
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values
