"""Pairwise-average smoothing of a sensor series.

For Gaussian samples the maximum-likelihood estimate of a pair's common mean
is their average. Averaging each sample with its predecessor, and keeping the
first raw sample, gives a series in which element ``k + 1`` depends only on
raw samples ``k`` and ``k + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series_io import SampleSeries


@dataclass(frozen=True)
class SmoothedSeries:
    times: np.ndarray
    values: np.ndarray
    source_length: int

    def __len__(self) -> int:
        return self.values.shape[0]

    def as_sample_series(self, name: str = "v1") -> SampleSeries:
        return SampleSeries(self.times, self.values[:, None], (name,))


def increments(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.shape[0] < 2:
        raise ValueError("increments need a 1-d vector of length >= 2")
    return v[1:] - v[:-1]


def smooth_values(values) -> np.ndarray:
    s = np.asarray(values, dtype=float)
    if s.ndim != 1 or s.shape[0] < 2:
        raise ValueError("smoothing needs at least 2 samples")
    out = np.empty_like(s)
    out[0] = s[0]
    out[1:] = (s[:-1] + s[1:]) / 2.0
    return out


def smooth_series(series: SampleSeries, feature: int = 0) -> SmoothedSeries:
    """x_1 = s_1 and x_{k+1} = (s_k + s_{k+1}) / 2; timestamps are kept as-is."""
    values = smooth_values(series.column(feature))
    values.setflags(write=False)
    return SmoothedSeries(times=series.times, values=values, source_length=len(series))
