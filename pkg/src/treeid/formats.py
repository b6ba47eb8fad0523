"""CSV and text serialization for Markov sequences, records and reports.

Floats are written with ``repr`` so that reading a file back reproduces
the values bit for bit.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .estimation import SimulationRecord
from .oracle import DistinguishabilityReport
from .recovery import RecoveredWeights
from .system import MarkovSequence


class FormatError(ValueError):
    pass


def _num(x: float) -> str:
    return repr(float(x))


def _sensor_ids(header: list[str], prefix: str, first: list[str]) -> tuple[int, ...]:
    if header[: len(first)] != first:
        raise FormatError(f"header must start with {','.join(first)}")
    ids = []
    for col in header[len(first):]:
        if not col.startswith(prefix):
            raise FormatError(f"bad column name {col!r}; expected {prefix}<id>")
        try:
            ids.append(int(col[len(prefix):]))
        except ValueError:
            raise FormatError(f"bad column name {col!r}; expected {prefix}<id>") from None
    if not ids:
        raise FormatError("no sensor columns")
    if ids != sorted(set(ids)):
        raise FormatError("sensor columns must be strictly ascending")
    return tuple(ids)


def _rows(text: str, width: int) -> np.ndarray:
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise FormatError(f"line {lineno}: expected {width} fields, got {len(row)}")
        try:
            rows.append([float(c) for c in row])
        except ValueError:
            raise FormatError(f"line {lineno}: non-numeric field") from None
    return np.array(rows, dtype=float).reshape(-1, width)


def _split_header(text: str) -> tuple[list[str], str]:
    head, _, body = text.lstrip("﻿").partition("\n")
    header = [c.strip() for c in next(csv.reader([head]), [])]
    if not header or header == [""]:
        raise FormatError("empty file")
    return header, body


def markov_to_csv(markov: MarkovSequence) -> str:
    """Header ``j,Q_<id>,...``; row ``j`` lists ``Q_j`` by ascending sensor id."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["j"] + [f"Q_{s}" for s in markov.sensors])
    for j, row in enumerate(markov.values):
        w.writerow([j] + [_num(x) for x in row])
    return out.getvalue()


def markov_from_csv(text: str) -> MarkovSequence:
    header, body = _split_header(text)
    sensors = _sensor_ids(header, "Q_", ["j"])
    data = _rows(body, len(header))
    if data.shape[0] == 0:
        raise FormatError("no Markov rows")
    if not np.array_equal(data[:, 0], np.arange(data.shape[0])):
        raise FormatError("column j must run 0, 1, 2, ... without gaps")
    return MarkovSequence(sensors, data[:, 1:].copy())


def record_to_csv(record: SimulationRecord) -> str:
    """Header ``t,u,y_<id>,...``; one row per sample."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t", "u"] + [f"y_{s}" for s in record.sensors])
    for t, u, y in zip(record.t, record.u, record.y):
        w.writerow([_num(t), _num(u)] + [_num(x) for x in y])
    return out.getvalue()


def record_from_csv(text: str) -> SimulationRecord:
    header, body = _split_header(text)
    sensors = _sensor_ids(header, "y_", ["t", "u"])
    data = _rows(body, len(header))
    if data.shape[0] < 2:
        raise FormatError("record needs at least two samples")
    t = data[:, 0]
    dt = float(t[1] - t[0])
    if not dt > 0 or not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0.0) or t[0] != 0.0:
        raise FormatError("time column must start at 0 with a constant positive step")
    return SimulationRecord(dt, data[:, 1].copy(), data[:, 2:].copy(), sensors)


def format_recovered(result: RecoveredWeights) -> str:
    lines = [f"edge {u} {v} {_num(w)}" for (u, v), w in zip(result.tree.edges, result.tree.weights)]
    lines.append(f"residual {result.residual:.6e}")
    return "\n".join(lines) + "\n"


def format_report(report: DistinguishabilityReport, counterexample=None, edges=None) -> str:
    """Plain-text verdict, gap and differing index, plus ``W'`` when present."""
    lines = [
        f"verdict: {report.verdict}",
        f"max_gap: {report.max_markov_gap:.6e}",
        f"first_differing_index: {'none' if report.first_differing_index is None else report.first_differing_index}",
    ]
    if counterexample is not None:
        lines.append(f"method: {counterexample.method}")
        lines.append(f"distance: {counterexample.distance:.6e}")
        for (u, v), w in zip(edges, counterexample.weights):
            lines.append(f"edge {u} {v} {_num(w)}")
    return "\n".join(lines) + "\n"


def read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")
