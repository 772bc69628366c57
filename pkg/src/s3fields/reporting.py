"""Atomic CSV/JSON report writers with lossless float formatting."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile


def fmt(value) -> str:
    """17 significant digits: enough to round-trip any double exactly."""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    return str(value)


def atomic_write_text(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def write_csv(path: str, fieldnames: list[str], rows: list[dict]):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: fmt(row[k]) for k in fieldnames})
    atomic_write_text(path, buf.getvalue())


def write_json(path: str, payload):
    atomic_write_text(path, json.dumps(payload, indent=1, sort_keys=True) + "\n")


def rows_to_stdout(fieldnames: list[str], rows: list[dict]):
    print(",".join(fieldnames))
    for row in rows:
        print(",".join(fmt(row[k]) for k in fieldnames))
