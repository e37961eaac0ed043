"""Sensor series data model and CSV persistence.

Rows are ``t,v1[,...,vs]``. Floats are written with 17 significant digits so
a write/load round trip reproduces every value bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class SeriesError(ValueError):
    """Raised when a series file or array violates the data model."""


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SampleSeries:
    """Timestamped sensor measurements.

    ``values`` is an ``N x s`` matrix; one column per feature. Arrays are
    copied and marked read-only on construction. No validation happens here,
    use :func:`validate_series` or :meth:`checked`.
    """

    times: np.ndarray
    values: np.ndarray
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        object.__setattr__(self, "times", _frozen(self.times))
        object.__setattr__(self, "values", _frozen(values))
        names = tuple(self.feature_names) or tuple(
            f"v{j + 1}" for j in range(values.shape[1] if values.ndim == 2 else 0)
        )
        object.__setattr__(self, "feature_names", names)

    @classmethod
    def checked(cls, times, values, feature_names: Sequence[str] = ()) -> "SampleSeries":
        series = cls(times, values, tuple(feature_names))
        problems = validate_series(series)
        if problems:
            raise SeriesError("; ".join(problems))
        return series

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def column(self, feature: int = 0) -> np.ndarray:
        if not 0 <= feature < self.n_features:
            raise SeriesError(
                f"feature index {feature} out of range for {self.n_features} feature(s)"
            )
        return self.values[:, feature]


def validate_series(series: SampleSeries) -> list[str]:
    """Return one message per violated invariant; empty means valid."""
    problems: list[str] = []
    times, values = series.times, series.values
    if values.ndim != 2:
        return [f"values must be a matrix, got {values.ndim}-d array"]
    n, s = values.shape
    if times.ndim != 1 or times.shape[0] != n:
        problems.append(f"times length {times.shape} does not match {n} value rows")
    if n < 1:
        problems.append("series is empty")
    if s < 1:
        problems.append("series has no features")
    if len(series.feature_names) != s:
        problems.append(f"{len(series.feature_names)} feature names for {s} features")
    if times.ndim == 1:
        for i in np.flatnonzero(~np.isfinite(times)):
            problems.append(f"non-finite time at row {i}")
        dt = np.diff(times)
        for i in np.flatnonzero(~(dt > 0)):
            problems.append(
                f"non-increasing timestamps at rows {i}-{i + 1} ({times[i]!r} -> {times[i + 1]!r})"
            )
    for i, j in np.argwhere(~np.isfinite(values)):
        problems.append(f"non-finite value at row {i}, column {j}")
    return problems


def format_float(x: float) -> str:
    return f"{x:.17g}"


def _parse_float(cell: str, lineno: int, col: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise SeriesError(f"line {lineno}, column {col}: non-numeric cell {cell!r}") from None


def parse_series(text: str, has_header: bool | None = None) -> SampleSeries:
    """Parse CSV text. ``has_header=None`` detects a leading ``t,`` line."""
    lines = [ln for ln in text.replace("\r\n", "\n").split("\n") if ln.strip()]
    names: tuple[str, ...] = ()
    start = 0
    if lines and (has_header or (has_header is None and lines[0].startswith("t,"))):
        header = [c.strip() for c in lines[0].split(",")]
        names = tuple(header[1:])
        start = 1
    body = lines[start:]
    if not body:
        raise SeriesError("empty body: no data rows")

    width = len(names) + 1 if names else None
    rows = []
    for offset, line in enumerate(body):
        lineno = start + offset + 1
        cells = line.split(",")
        if width is None:
            width = len(cells)
        if len(cells) != width:
            raise SeriesError(f"line {lineno}: ragged row with {len(cells)} fields, expected {width}")
        rows.append([_parse_float(c.strip(), lineno, j) for j, c in enumerate(cells)])
    if width < 2:
        raise SeriesError("rows need a timestamp and at least one value column")

    data = np.array(rows, dtype=float)
    return SampleSeries.checked(data[:, 0], data[:, 1:], names)


def load_series(path, has_header: bool | None = None) -> SampleSeries:
    """Load and validate a series file. I/O failures propagate as ``OSError``."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_series(text, has_header)


def render_series(series: SampleSeries, header: bool = True) -> str:
    out = []
    if header:
        out.append(",".join(("t",) + series.feature_names))
    for t, row in zip(series.times, series.values):
        out.append(",".join([format_float(t)] + [format_float(v) for v in row]))
    return "\n".join(out) + "\n"


def write_series(series: SampleSeries, path, header: bool = True) -> None:
    Path(path).write_text(render_series(series, header), encoding="utf-8")

