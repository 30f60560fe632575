"""File formats: point/coloring CSV and measure/trace JSON."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DimensionError, ParseError
from .measures import Measure, measure_from_dict, measure_to_dict
from .pointset import PointSet
from .transference import HalvingStep, TransferenceTrace


def format_float(x: float) -> str:
    return "%.17g" % x


def save_points(path, p: PointSet, header: bool = False):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{j}" for j in range(p.d)])
        for row in p.points:
            w.writerow([format_float(v) for v in row])


def load_points(path, d: int | None = None, header: bool = False) -> PointSet:
    """Read a point CSV. Row ``i`` of the file is reported as line ``i`` (1-based)."""
    rows = []
    width = d
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if width is None:
                width = len(row)
            if len(row) != width:
                raise ParseError(f"expected {width} columns, found {len(row)}", line=lineno, source=path)
            vals = []
            for col, cell in enumerate(row, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"not a number: {cell!r}", line=lineno, column=col, source=path) from None
                if not 0.0 <= v <= 1.0:
                    raise ParseError(f"coordinate {v!r} outside [0, 1]", line=lineno, column=col, source=path)
                vals.append(v)
            rows.append(vals)
    if width is None:
        raise ParseError("no points found", source=path)
    return PointSet(np.asarray(rows, dtype=np.float64).reshape(-1, width))


def save_coloring(path, y):
    with open(path, "w") as fh:
        for s in np.asarray(y):
            fh.write(f"{int(s)}\n")


def load_coloring(path, n: int | None = None) -> np.ndarray:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            t = line.strip()
            if not t:
                continue
            if t not in ("1", "-1", "+1"):
                raise ParseError(f"expected +1 or -1, found {t!r}", line=lineno, column=1, source=path)
            out.append(int(t))
    y = np.asarray(out, dtype=np.int8)
    if n is not None and y.size != n:
        raise DimensionError(f"coloring has {y.size} entries, point set has {n}")
    return y


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno, source=path) from None


def load_measure(path) -> Measure:
    return measure_from_dict(_read_json(path), where=str(Path(path).name))


def save_measure(path, m: Measure):
    write_json(path, measure_to_dict(m))


def write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")


def save_trace(path, trace: TransferenceTrace):
    write_json(path, trace.to_dict())


def load_trace(path) -> TransferenceTrace:
    doc = _read_json(path)
    try:
        steps = tuple(
            HalvingStep(
                index=s["index"],
                size_before=s["size_before"],
                delta=s["delta"],
                minority_size=s["minority_size"],
                padding_count=s["padding_count"],
                kept_indices=tuple(s["kept_indices"]),
            )
            for s in doc["steps"]
        )
        return TransferenceTrace(
            k=doc["k"],
            N=doc["N"],
            steps=steps,
            D0=doc["D0"],
            Dk=doc.get("Dk"),
            Di=tuple(doc["Di"]) if doc.get("Di") is not None else None,
            config=doc.get("config"),
            seeds=doc.get("seeds"),
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed trace: {exc}", source=path) from None
