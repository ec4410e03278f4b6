"""Bit-stable serialization of result documents.

Field order is the insertion order of the document (producers build them in a fixed
order) and every float is written with 17 significant digits, so equal results give
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any


def _float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        # JSON has no literal for these; keep them readable and parseable by Python's json
        return "NaN" if math.isnan(x) else ("Infinity" if x > 0 else "-Infinity")
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def to_json(doc: Any, indent: int = 2) -> str:
    out: list[str] = []

    def emit(v: Any, level: int) -> None:
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(v, bool) or v is None or isinstance(v, str):
            out.append(json.dumps(v))
        elif isinstance(v, int):
            out.append(str(v))
        elif isinstance(v, float):
            out.append(_float(v))
        elif isinstance(v, dict):
            if not v:
                out.append("{}")
                return
            out.append("{\n")
            for n, (k, item) in enumerate(v.items()):
                out.append(f"{pad}{json.dumps(str(k))}: ")
                emit(item, level + 1)
                out.append(",\n" if n < len(v) - 1 else "\n")
            out.append(end + "}")
        elif isinstance(v, (list, tuple)):
            if not v:
                out.append("[]")
                return
            if all(isinstance(e, (int, float)) and not isinstance(e, bool) for e in v):
                out.append("[")
                for n, e in enumerate(v):
                    emit(float(e) if isinstance(e, float) else e, level + 1)
                    if n < len(v) - 1:
                        out.append(", ")
                out.append("]")
                return
            out.append("[\n")
            for n, item in enumerate(v):
                out.append(pad)
                emit(item, level + 1)
                out.append(",\n" if n < len(v) - 1 else "\n")
            out.append(end + "]")
        elif hasattr(v, "item"):  # numpy scalars
            emit(v.item(), level)
        else:
            raise TypeError(f"cannot serialize {type(v).__name__}")

    emit(doc, 0)
    return "".join(out) + "\n"


def from_json(text: str) -> Any:
    return json.loads(text)


def _flatten(prefix: str, v: Any, row: dict) -> None:
    if isinstance(v, dict):
        for k, item in v.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), item, row)
    elif isinstance(v, (list, tuple)):
        # nested arrays (certificates, witnesses) stay in the JSON report
        return
    else:
        row[prefix] = _float(v) if isinstance(v, float) else v


def to_csv(doc: dict) -> str:
    """One row per case; scalar fields only, columns in first-seen order."""
    rows = []
    for case in doc.get("cases", []):
        row: dict = {}
        _flatten("", case, row)
        rows.append(row)
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
