"""Datasets, empirical covariance and the Fisher-Z partial-correlation test."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .covariance import CITestSpec, LabeledCovariance, partial_correlation
from .errors import (
    ConfigError,
    DegenerateVariance,
    DimensionMismatch,
    InsufficientSamples,
    TooFewRows,
)


@dataclass(frozen=True)
class Dataset:
    """n x d numeric sample matrix with named columns."""

    columns: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self) -> None:
        cols = tuple(self.columns)
        object.__setattr__(self, "columns", cols)
        if len(set(cols)) != len(cols):
            raise DimensionMismatch("column names must be unique")
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != len(cols):
            raise DimensionMismatch(
                f"rows must be n x {len(cols)}, got shape {rows.shape}"
            )
        if rows.shape[0] < 1:
            raise TooFewRows("dataset needs at least one row")
        if not np.all(np.isfinite(rows)):
            raise DimensionMismatch("dataset contains non-finite values")
        rows = rows.copy()
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return int(self.rows.shape[0])


@dataclass(frozen=True)
class TestOutcome:
    test: CITestSpec
    r: float
    z_stat: float
    n_effective: int
    reject: bool
    alpha_level: float


def empirical_covariance(data: Dataset) -> LabeledCovariance:
    """Mean-centered sample covariance with 1/(n-1) normalization."""
    if data.n < 2:
        raise TooFewRows(f"need at least 2 rows for a covariance, got {data.n}")
    centered = data.rows - data.rows.mean(axis=0, keepdims=True)
    matrix = centered.T @ centered / (data.n - 1)
    return LabeledCovariance(data.columns, matrix)


def fisher_z_from_covariance(
    cov: LabeledCovariance, n: int, test: CITestSpec, alpha_level: float = 0.05
) -> TestOutcome:
    """Fisher-Z test from a precomputed covariance of an n-row sample."""
    n_eff = n - len(test.cond) - 3
    if n_eff < 1:
        raise InsufficientSamples(
            f"n={n} with |cond|={len(test.cond)} leaves no degrees of freedom"
        )
    r = partial_correlation(cov, test)
    if abs(r) > 1.0 - 1e-12:
        raise DegenerateVariance(f"|r|={abs(r):.15f} rounds to 1 for test {test}")
    z = 0.5 * math.log((1.0 + r) / (1.0 - r)) * math.sqrt(n_eff)
    critical = norm.ppf(1.0 - alpha_level / 2.0)
    return TestOutcome(
        test=test,
        r=r,
        z_stat=z,
        n_effective=n_eff,
        reject=abs(z) > critical,
        alpha_level=alpha_level,
    )


def fisher_z_test(data: Dataset, test: CITestSpec, alpha_level: float = 0.05) -> TestOutcome:
    """Fisher-Z partial-correlation test on raw data."""
    return fisher_z_from_covariance(empirical_covariance(data), data.n, test, alpha_level)


def read_dataset_csv(source) -> Dataset:
    """Parse a dataset from CSV text, a file object, or a path.

    First row is the header; every remaining cell must be numeric. Bad
    cells are reported with their line number.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigError("empty CSV: no header row")
    header = [h.strip() for h in header]
    rows = []
    for line_no, record in enumerate(reader, start=2):
        if not record or (len(record) == 1 and not record[0].strip()):
            continue
        if len(record) != len(header):
            raise ConfigError(
                f"line {line_no}: expected {len(header)} fields, got {len(record)}"
            )
        parsed = []
        for name, cell in zip(header, record):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise ConfigError(f"line {line_no}: non-numeric value {cell!r} in column {name!r}")
        rows.append(parsed)
    if not rows:
        raise ConfigError("CSV has a header but no data rows")
    return Dataset(tuple(header), np.array(rows, dtype=float))


def write_dataset_csv(data: Dataset, out) -> None:
    """Write a dataset as CSV with a fixed repr-based float format."""
    close = False
    if not hasattr(out, "write"):
        out = open(out, "w", encoding="utf-8", newline="")
        close = True
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(data.columns)
        for row in data.rows:
            writer.writerow([repr(float(v)) for v in row])
    finally:
        if close:
            out.close()


def read_covariance_csv(source) -> LabeledCovariance:
    """Parse a covariance matrix CSV: header row of labels, then a square matrix."""
    data = read_dataset_csv(source)
    if data.n != len(data.columns):
        raise ConfigError(
            f"covariance CSV must be square: {len(data.columns)} columns but {data.n} rows"
        )
    return LabeledCovariance(data.columns, np.array(data.rows))


def write_covariance_csv(cov: LabeledCovariance, out) -> None:
    write_dataset_csv(Dataset(cov.labels, np.array(cov.matrix)), out)
