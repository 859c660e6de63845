"""Atomic CSV and JSON writers with a deterministic encoding."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np


def to_jsonable(obj):
    """Plain-Python copy of ``obj`` with non-finite floats spelled as strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return str(obj)


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, payload: dict) -> None:
    text = json.dumps(to_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    atomic_write_text(path, text + "\n")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    atomic_write_text(path, buf.getvalue())


def write_trajectory(path: Path, t, x, xp, W) -> None:
    write_csv(path, ("t", "x", "x_prime", "wronskian"), zip(t, x, xp, W))


def write_indicators(path: Path, est) -> None:
    write_csv(path, ("t", "ratio", "running_sup", "running_inf"),
              zip(est.checkpoints, est.ratios, est.running_sup, est.running_inf))


def write_witnesses(path: Path, report) -> None:
    rows = []
    d = report.details
    for t, v, lhs in zip(report.negative_witnesses, report.negative_values, d.get("negative_lhs", [])):
        rows.append(("negative", t, v, lhs))
    for t, v, lhs in zip(report.positive_witnesses, report.positive_values, d.get("positive_lhs", [])):
        rows.append(("positive", t, v, lhs))
    for t in report.zeros:
        rows.append(("zero", t, 0.0, ""))
    rows.sort(key=lambda r: float(r[1]))
    write_csv(path, ("kind", "t", "value", "lhs_14_or_15"), rows)
