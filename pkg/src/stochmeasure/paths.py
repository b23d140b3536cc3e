"""Uniformly sampled time series and their CSV form."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

CSV_FLOAT = "%.17g"


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Scalar samples ``values[k]`` at times ``t0 + k * dt``."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValidationError("a sampled path needs a 1-D array of at least 2 samples")
        if not (math.isfinite(self.t0) and math.isfinite(self.dt)) or self.dt <= 0:
            raise ValidationError(f"path needs finite t0 and dt > 0, got t0={self.t0}, dt={self.dt}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("path values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def duration(self):
        return self.dt * (self.values.size - 1)

    def with_values(self, values):
        return SampledPath(self.t0, self.dt, values)

    @classmethod
    def from_function(cls, f, t0, dt, n):
        t = t0 + dt * np.arange(n)
        return cls(t0, dt, np.broadcast_to(np.asarray(f(t), dtype=float), t.shape))

    @classmethod
    def from_samples(cls, t, values, rtol=1e-9):
        """Build from explicit sample times, rejecting non-uniform spacing."""
        t = np.asarray(t, dtype=float)
        if t.size < 2 or t.size != np.size(values):
            raise DomainError("times and values must have equal length >= 2")
        steps = np.diff(t)
        dt = (t[-1] - t[0]) / (t.size - 1)
        if dt <= 0 or np.max(np.abs(steps - dt)) > rtol * max(abs(dt), np.max(np.abs(t))):
            raise DomainError("drive samples are not uniformly spaced")
        return cls(float(t[0]), float(dt), values)

    def to_csv(self, path, header=("t", "value")):
        write_columns(path, header, [self.times, self.values])

    @classmethod
    def from_csv(cls, path):
        header, cols = read_columns(path)
        if len(cols) < 2:
            raise DomainError(f"{path}: expected columns t,value")
        return cls.from_samples(cols[0], cols[1])


def format_columns(header, columns) -> str:
    """Equal-length numeric columns as CSV text with round-trip precision."""
    rows = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([CSV_FLOAT % v for v in row])
    return buf.getvalue()


def write_columns(path, header, columns):
    with open(path, "w", newline="") as fh:
        fh.write(format_columns(header, columns))


def read_columns(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise DomainError(f"{path}: empty CSV")
    header = None
    try:
        float(rows[0][0])
    except ValueError:
        header, rows = rows[0], rows[1:]
    try:
        data = np.array([[float(x) for x in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise DomainError(f"{path}: non-numeric CSV entry ({exc})") from None
    if data.ndim != 2 or data.shape[0] == 0:
        raise DomainError(f"{path}: ragged or empty CSV")
    return header, [data[:, j] for j in range(data.shape[1])]
