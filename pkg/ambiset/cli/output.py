"""Rendering of command results as JSON, an aligned table, or CSV."""

import csv
import io
import json
from typing import Any

from pydantic import BaseModel

from ambiset.models.config import OutputFormat

SIGNIFICANT_DIGITS = 12


def round_floats(value: Any) -> Any:
    """Round every float to 12 significant digits, recursively; ``-0.0`` becomes ``0.0``."""
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        rounded = float(f"{value:.{SIGNIFICANT_DIGITS}g}")
        return rounded + 0.0
    if isinstance(value, dict):
        return {key: round_floats(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [round_floats(item) for item in value]
    return value


def _jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(item) for item in value]
    return value


def to_payload(result: Any) -> Any:
    """JSON-ready, rounded data for models, lists of models, or plain records."""
    return round_floats(_jsonable(result))


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    if isinstance(value, list | dict):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def _flatten(record: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def tabulate(payload: Any) -> tuple[list[str], list[list[str]]]:
    """Header and rows: one row per record for lists, ``field,value`` pairs for single objects."""
    if isinstance(payload, list):
        records = [_flatten(item) if isinstance(item, dict) else {"value": item} for item in payload]
        header: list[str] = []
        for record in records:
            header.extend(key for key in record if key not in header)
        return header, [[_cell(record.get(key)) for key in header] for record in records]
    return ["field", "value"], [[key, _cell(value)] for key, value in _flatten(payload).items()]


def render(payload: Any, fmt: OutputFormat) -> str:
    """Text for standard output, without a trailing newline."""
    match fmt:
        case OutputFormat.JSON:
            return json.dumps(payload, indent=2)
        case OutputFormat.CSV:
            header, rows = tabulate(payload)
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
            return buffer.getvalue().rstrip("\n")
        case OutputFormat.TABLE:
            header, rows = tabulate(payload)
            widths = [max(len(line[i]) for line in [header, *rows]) for i in range(len(header))]
            lines = [
                "  ".join(cell.ljust(width) for cell, width in zip(line, widths, strict=True)).rstrip()
                for line in [header, [("-" * width) for width in widths], *rows]
            ]
            return "\n".join(lines)
