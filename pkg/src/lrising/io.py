"""CSV and JSON serialization of time series and scaling reports.

CSV: ``#``-prefixed metadata lines, one column-header line, then data with
17 significant digits. JSON: one document with ``schema_version``,
``config`` and ``results``; floats use Python's shortest round-trip repr,
so a load reproduces every value bit for bit.
"""

from __future__ import annotations

import io
import json
from pathlib import Path
from typing import TextIO

import numpy as np

from .analysis import EquilibrationReport
from .errors import ValidationError
from .evolution import TimeSeries

FORMAT_VERSION = 1
SCHEMA_VERSION = 1
FLOAT_FMT = "%.17g"


def _open_text(target, mode):
    if target is None or target == "-":
        return None
    return open(target, mode, encoding="utf-8", newline="")


def format_csv(columns: dict, meta: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# format_version: {FORMAT_VERSION}\n")
    for key, value in meta.items():
        text = json.dumps(value, sort_keys=True) if isinstance(value, (dict, list)) else str(value)
        buf.write(f"# {key}: {text}\n")
    names = list(columns)
    buf.write(",".join(names) + "\n")
    arrays = [np.asarray(columns[n]) for n in names]
    for row in zip(*arrays):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return FLOAT_FMT % v


def write_text(text: str, target=None, stream: TextIO | None = None) -> None:
    fh = _open_text(target, "w")
    if fh is None:
        (stream or _stdout()).write(text)
        return
    with fh:
        fh.write(text)


def _stdout():
    import sys

    return sys.stdout


def parse_csv(text: str) -> tuple[dict, dict]:
    """Return (metadata, columns) from CSV text written by :func:`format_csv`."""
    meta: dict = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        key, _, value = lines[i][1:].strip().partition(":")
        value = value.strip()
        try:
            meta[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            meta[key.strip()] = value
        i += 1
    if i >= len(lines):
        raise ValidationError("CSV has no column header")
    names = lines[i].split(",")
    rows = [line.split(",") for line in lines[i + 1 :] if line.strip()]
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    return meta, {n: data[:, k] for k, n in enumerate(names)}


def series_csv(ts: TimeSeries, config: dict | None = None) -> str:
    meta = {"mode": ts.mode, "digest": ts.digest, "initial_value": repr(float(ts.initial_value))}
    meta["params"] = ts.params
    meta["config"] = config or {}
    return format_csv({"t": ts.times, "value": ts.values}, meta)


def read_series_csv(path) -> tuple[TimeSeries, dict]:
    meta, cols = parse_csv(Path(path).read_text(encoding="utf-8"))
    ts = TimeSeries(cols["t"], cols["value"], str(meta.get("mode", "")), str(meta.get("digest", "")),
                    meta.get("params", {}), float(meta.get("initial_value", 1.0)))
    return ts, meta


def series_payload(ts: TimeSeries) -> dict:
    return {
        "mode": ts.mode,
        "digest": ts.digest,
        "params": ts.params,
        "initial_value": float(ts.initial_value),
        "times": [float(x) for x in ts.times],
        "values": [float(x) for x in ts.values],
    }


def series_from_payload(doc: dict) -> TimeSeries:
    return TimeSeries(
        np.array(doc["times"], dtype=np.float64),
        np.array(doc["values"], dtype=np.float64),
        doc["mode"],
        doc["digest"],
        doc.get("params", {}),
        doc.get("initial_value", 1.0),
    )


def json_document(config: dict, results: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "format_version": FORMAT_VERSION, "config": config, "results": results}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"


def write_json(doc: dict, target=None) -> None:
    write_text(dumps(doc), target)


def read_json(path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {doc.get('schema_version')!r}")
    return doc


def report_csv(report: EquilibrationReport, config: dict | None = None) -> str:
    meta = {"theta": report.theta, "alpha": report.alpha, "gamma": repr(report.gamma), "config": config or {}}
    return format_csv({"lnN": np.log(report.n_values), "ln_tau0": np.log(report.tau_values)}, meta)


def report_from_dict(d: dict) -> EquilibrationReport:
    return EquilibrationReport(
        d["theta"], d["alpha"], d["dimension"],
        [e["N"] for e in d["entries"]], [e["tau0"] for e in d["entries"]],
        d["gamma"], d["gamma_stderr"], d["intercept"], d.get("residuals", []),
    )
