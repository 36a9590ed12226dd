"""Byte-stable CSV and JSON emission.

Reals are written with ``repr`` (shortest string that round-trips), NaN and
infinities become ``null`` in JSON and empty fields in CSV, and lines end
with a bare LF.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .measure import MeshProfile
from .spectrum import SpectrumCurve


def to_plain(obj):
    """Recursively turn results into JSON-ready builtins."""
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    if isinstance(obj, MeshProfile):
        return {
            "r": obj.r,
            "depth": obj.depth,
            "cells": [dict(zip(("j", "center", "lo", "hi"), row)) for row in obj.rows()],
        }
    if isinstance(obj, enum.Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj if obj is None or isinstance(obj, str) else str(obj)


def dumps_json(obj) -> str:
    return json.dumps(to_plain(obj), separators=(",", ":"), allow_nan=False) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, separators=(",", ":"))
    return str(v)


def _curve_rows(curve: SpectrumCurve):
    for pt in curve.points:
        yield [pt.q, pt.alpha, pt.f]


def table(obj) -> tuple[list[str], list[list]]:
    """Header and rows for the CSV form of a result."""
    if isinstance(obj, SpectrumCurve):
        return ["q", "alpha", "f"], list(_curve_rows(obj))
    if isinstance(obj, MeshProfile):
        return ["j", "center", "lo", "hi"], [list(r) for r in obj.rows()]
    if isinstance(obj, dict) and obj and all(isinstance(v, SpectrumCurve) for v in obj.values()):
        rows = [[name, *row] for name, c in obj.items() for row in _curve_rows(c)]
        return ["curve", "q", "alpha", "f"], rows
    plain = to_plain(obj)
    if isinstance(plain, list) and plain and all(isinstance(r, dict) for r in plain):
        header = list(plain[0])
        return header, [[r.get(h) for h in header] for r in plain]
    if isinstance(plain, dict):
        return list(plain), [list(plain.values())]
    raise TypeError(f"no tabular form for {type(obj).__name__}")


def dumps_csv(obj) -> str:
    header, rows = table(obj)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(to_plain(v)) for v in row])
    return buf.getvalue()


def emit(result, fmt: str = "json", path: str | None = None) -> None:
    if fmt == "json":
        text = dumps_json(result)
    elif fmt == "csv":
        text = dumps_csv(result)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc
