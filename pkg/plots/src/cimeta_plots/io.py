"""Readers for the two cimeta CSV schemas.

Grid CSV:  param1,param2,value,status   (one row per cell)
Pair CSV:  test1,test2,value            (one row per ordered test pair)
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

GRID_COLUMNS = ("param1", "param2", "value", "status")
PAIR_COLUMNS = ("test1", "test2", "value")


class SchemaError(ValueError):
    """Input CSV does not match the expected schema."""


@dataclass(frozen=True)
class GridData:
    """Grid cells reshaped onto the (param1, param2) lattice."""

    param1: np.ndarray  # sorted unique axis-1 values
    param2: np.ndarray
    values: np.ndarray  # len(param1) x len(param2), NaN for failed cells
    statuses: np.ndarray  # same shape, dtype=object

    @property
    def attrition(self) -> int:
        return int(np.sum(self.statuses != "ok"))


@dataclass(frozen=True)
class PairData:
    tests: tuple[str, ...]
    values: np.ndarray  # square, row order = column order = tests


def _read_rows(path, expected_columns):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {expected_columns}")
        header = tuple(h.strip() for h in header)
        if header != expected_columns:
            missing = [c for c in expected_columns if c not in header]
            extra = [c for c in header if c not in expected_columns]
            raise SchemaError(
                f"{path}: bad header; missing columns {missing}, unexpected {extra}"
            )
        rows = []
        for line_no, record in enumerate(reader, start=2):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if len(record) != len(expected_columns):
                raise SchemaError(
                    f"{path}: line {line_no}: expected {len(expected_columns)} fields, "
                    f"got {len(record)}"
                )
            rows.append((line_no, record))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _parse_float(path, line_no, column, cell):
    try:
        return float(cell)
    except ValueError:
        raise SchemaError(
            f"{path}: line {line_no}: non-numeric value {cell!r} in column {column!r}"
        )


def read_grid_csv(path) -> GridData:
    rows = _read_rows(path, GRID_COLUMNS)
    p1s, p2s, cells = [], [], {}
    for line_no, (c1, c2, value, status) in rows:
        v1 = _parse_float(path, line_no, "param1", c1)
        v2 = _parse_float(path, line_no, "param2", c2)
        v = _parse_float(path, line_no, "value", value)
        p1s.append(v1)
        p2s.append(v2)
        cells[(v1, v2)] = (v, status.strip())
    param1 = np.array(sorted(set(p1s)))
    param2 = np.array(sorted(set(p2s)))
    values = np.full((len(param1), len(param2)), math.nan)
    statuses = np.full((len(param1), len(param2)), "missing", dtype=object)
    for i, v1 in enumerate(param1):
        for j, v2 in enumerate(param2):
            if (v1, v2) in cells:
                values[i, j], statuses[i, j] = cells[(v1, v2)]
    return GridData(param1=param1, param2=param2, values=values, statuses=statuses)


def read_pair_csv(path) -> PairData:
    rows = _read_rows(path, PAIR_COLUMNS)
    tests: list[str] = []
    entries = {}
    for line_no, (t1, t2, value) in rows:
        t1, t2 = t1.strip(), t2.strip()
        for t in (t1, t2):
            if t not in tests:
                tests.append(t)
        entries[(t1, t2)] = _parse_float(path, line_no, "value", value)
    k = len(tests)
    values = np.full((k, k), math.nan)
    for i, t1 in enumerate(tests):
        for j, t2 in enumerate(tests):
            if (t1, t2) in entries:
                values[i, j] = entries[(t1, t2)]
    return PairData(tests=tuple(tests), values=values)


def margin_stamp(path) -> str:
    """Provenance stamp drawn in the image margin: row count + content hash."""
    data = Path(path).read_bytes()
    n_rows = max(data.count(b"\n") - 1, 0)  # header excluded
    digest = hashlib.sha256(data).hexdigest()[:8]
    return f"rows={n_rows} sha256={digest}"
