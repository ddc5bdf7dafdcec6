"""CSV/JSON emission and the matching readers.

Floats are written with 17 significant digits so they round-trip exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def table_to_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return {"float": repr(v)}
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return v.item()
    return v


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def table_to_json(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    return to_json([dict(zip(columns, r)) for r in rows])


def flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    """Nested dict as (dotted key, scalar) pairs, for CSV rendering of reports."""
    out = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.extend(flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out.append((key, json.dumps(_jsonable(v))))
        else:
            out.append((key, v))
    return out


def _parse(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(source) -> tuple[list[str], list[list]]:
    """Columns and typed rows from CSV text or a path."""
    text = Path(source).read_text() if isinstance(source, Path) else source
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return [], []
    return rows[0], [[_parse(c) for c in r] for r in rows[1:]]


def _unjson(v):
    if isinstance(v, dict):
        if set(v) == {"float"}:
            return float(v["float"])
        return {k: _unjson(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_unjson(x) for x in v]
    return v


def read_json(source):
    text = Path(source).read_text() if isinstance(source, Path) else source
    return _unjson(json.loads(text))


def read_output(path) -> object:
    """Parse a file written by the command-line tool, by extension."""
    p = Path(path)
    if p.suffix == ".json":
        return read_json(p)
    return read_csv(p)
