"""Deterministic JSON/CSV writers shared by the command-line tools."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "1.0"


def _plain(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return _plain(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(payload: dict, kind: str) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind}
    doc.update(_plain(payload))
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path, payload: dict, kind: str) -> Path:
    path = Path(path)
    path.write_text(dumps(payload, kind), encoding="utf-8")
    return path


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def fmt(v) -> str:
    """Shortest round-tripping text for a float; ints stay ints."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))
