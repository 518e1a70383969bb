"""Column tables written as CSV or JSON, with matching readers."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np


def _cell(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _json_value(x):
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else str(x)


def write_table(path: str | Path, columns: Mapping[str, Sequence], fmt: str = "csv") -> Path:
    path = Path(path)
    names = list(columns)
    lengths = {len(columns[c]) for c in names}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for row in zip(*(columns[c] for c in names)):
                w.writerow([_cell(x) for x in row])
    elif fmt == "json":
        data = {c: [_json_value(x) for x in columns[c]] for c in names}
        path.write_text(json.dumps({"columns": names, "data": data}, indent=1))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def _parse(s):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s  # text cells, e.g. rendered polynomials


def read_table(path: str | Path) -> dict[str, list]:
    """Inverse of :func:`write_table`; the format is taken from the suffix."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        return {c: [float(x) if isinstance(x, str) else x for x in doc["data"][c]] for c in doc["columns"]}
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    names = rows[0]
    cols: dict[str, list] = {c: [] for c in names}
    for row in rows[1:]:
        for c, x in zip(names, row):
            cols[c].append(_parse(x))
    return cols
