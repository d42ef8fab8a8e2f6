"""Result tables as JSON, CSV or Markdown."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from pathlib import Path
from typing import Sequence

from ..errors import ConfigError, DataError

LEAD_FIELDS = ("war", "uar")


class ReportFormat(str, enum.Enum):
    JSON = "json"
    CSV = "csv"
    MARKDOWN = "markdown"

    @classmethod
    def parse(cls, value: "str | ReportFormat") -> "ReportFormat":
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        if v == "md":
            v = "markdown"
        try:
            return cls(v)
        except ValueError:
            raise ConfigError(f"unknown report format {value!r}; expected json, csv or markdown") from None


def _as_dict(rec) -> dict:
    return rec.to_dict() if hasattr(rec, "to_dict") else dict(rec)


def field_order(records: Sequence[dict]) -> list[str]:
    """``war``, ``uar`` first, then other keys in first-seen order."""
    seen: list[str] = []
    for r in records:
        for k in r:
            if k not in seen:
                seen.append(k)
    lead = [k for k in LEAD_FIELDS if k in seen]
    return lead + [k for k in seen if k not in LEAD_FIELDS]


def _cell(v, md: bool) -> str:
    if v is None:
        return "FAILED" if md else ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        if md:
            return "nan" if math.isnan(v) else f"{v:.4f}"
        return repr(v)
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v)
    return str(v)


def render(records, fmt: "str | ReportFormat") -> str:
    fmt = ReportFormat.parse(fmt)
    rows = [_as_dict(r) for r in records]
    if not rows:
        raise DataError("no records to report")
    keys = field_order(rows)
    if fmt is ReportFormat.JSON:
        ordered = [{k: r.get(k) for k in keys} for r in rows]
        return json.dumps(ordered, indent=2) + "\n"
    if fmt is ReportFormat.CSV:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([_cell(r.get(k), md=False) for k in keys])
        return buf.getvalue()
    lines = ["| " + " | ".join(keys) + " |", "|" + "|".join("---" for _ in keys) + "|"]
    for r in rows:
        lines.append("| " + " | ".join(_cell(r.get(k), md=True) for k in keys) + " |")
    return "\n".join(lines) + "\n"


def emit_report(records, fmt: "str | ReportFormat", path: str | Path | None = None) -> str:
    """Render ``records`` and, when ``path`` is given, write them there.

    Raises ``OSError`` if the path cannot be written.
    """
    text = render(records, fmt)
    if path is not None:
        Path(path).write_text(text)
    return text


def load_records(path: str | Path) -> list[dict]:
    """Records from a JSON report, a RunRecord JSON or a list of either."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from exc
    if isinstance(data, dict):
        data = data.get("rows", [data])
    if not isinstance(data, list) or not all(isinstance(r, dict) for r in data):
        raise DataError(f"{path}: expected a JSON object or a list of objects")
    return data
