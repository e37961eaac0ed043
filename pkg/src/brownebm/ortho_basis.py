"""Segment vectors of a smoothed series and their odd/even rescaling.

Each segment ``x_k = (dt_k, dv_k)`` joins consecutive points of the smoothed
series. Odd-indexed segments are rescaled along their own direction by

    c_k = ||x_k|| - |y_k| * ||neighbor||

where ``y_k`` is the cosine between ``x_k`` and its neighbor (``x_{k+1}``,
or ``x_{S-1}`` for the last segment when S is odd). Even-indexed segments
pass through unchanged. The per-segment factor ``||x_k|| / c_k`` maps the
scaled vector ``z_k`` back onto ``x_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .markov_mle import SmoothedSeries

RIGHT_ANGLE_TOL = 1e-12
DEGENERATE_TOL = 1e-12


class DegenerateScaleError(ValueError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class SegmentVector:
    dt: float
    dv: float
    k: int = 0

    @property
    def norm(self) -> float:
        return math.hypot(self.dt, self.dv)


@dataclass(frozen=True)
class OrthoBasis:
    z: np.ndarray  # S x 2, columns (dt, dv)
    c: np.ndarray
    y: np.ndarray
    fourier: np.ndarray
    parity: tuple[str, ...]

    def __len__(self) -> int:
        return self.z.shape[0]


def segment_vectors(series: SmoothedSeries) -> list[SegmentVector]:
    t = np.asarray(series.times, dtype=float)
    v = np.asarray(series.values, dtype=float)
    if v.shape[0] < 2:
        raise ValueError("segment vectors need at least 2 points")
    dts, dvs = np.diff(t), np.diff(v)
    return [SegmentVector(float(a), float(b), k + 1) for k, (a, b) in enumerate(zip(dts, dvs))]


def cosine_y(a: SegmentVector, b: SegmentVector) -> float:
    na, nb = a.norm, b.norm
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for a zero-norm vector")
    y = (a.dt * b.dt + a.dv * b.dv) / (na * nb)
    return min(1.0, max(-1.0, y))


def _scale(norm_k: float, norm_nb: float, y: float) -> float:
    # arccos(y) lies in [0, pi], so comparing it with pi/2 is a sign test on y.
    if abs(y) <= RIGHT_ANGLE_TOL:
        return norm_k
    if y < 0.0:
        return norm_k + y * norm_nb
    return norm_k - y * norm_nb


def scale_c(xk: SegmentVector, neighbor: SegmentVector) -> float:
    y = cosine_y(xk, neighbor)
    nk = xk.norm
    c = _scale(nk, neighbor.norm, y)
    if abs(c) < DEGENERATE_TOL * nk:
        raise DegenerateScaleError(
            f"degenerate scale c={c!r} at segment {xk.k} (|c| < {DEGENERATE_TOL:g}*||x_k||)",
            index=xk.k,
        )
    return c


def orthogonalize(vectors: list[SegmentVector]) -> OrthoBasis:
    """Apply the odd/even rescaling to every segment.

    Segment indices are 1-based. Raises :class:`DegenerateScaleError` naming
    the first index whose scale constant vanishes.
    """
    S = len(vectors)
    if S < 2:
        raise ValueError(f"orthogonalize needs at least 2 segment vectors, got {S}")
    x = np.array([[v.dt, v.dv] for v in vectors], dtype=float)
    norms = np.array([v.norm for v in vectors])
    if np.any(norms == 0.0):
        raise ValueError(f"zero-norm segment at index {int(np.argmin(norms)) + 1}")

    z = x.copy()
    c = norms.copy()
    y = np.empty(S)
    fourier = np.ones(S)
    parity = []
    for i in range(S):
        k = i + 1
        nb = i + 1 if k < S else i - 1
        y[i] = cosine_y(vectors[i], vectors[nb])
        if k % 2 == 0:
            parity.append("even")
            continue
        parity.append("odd" if k < S else "last")
        c[i] = scale_c(SegmentVector(x[i, 0], x[i, 1], k), vectors[nb])
        z[i] = c[i] * (x[i] / norms[i])
        fourier[i] = norms[i] / c[i]
    for arr in (z, c, y, fourier):
        arr.setflags(write=False)
    return OrthoBasis(z=z, c=c, y=y, fourier=fourier, parity=tuple(parity))


def reconstruct(basis: OrthoBasis) -> list[SegmentVector]:
    if np.any(basis.c == 0.0):
        raise DegenerateScaleError("zero scale constant in basis", index=int(np.argmin(np.abs(basis.c))) + 1)
    x = basis.z * basis.fourier[:, None]
    return [SegmentVector(float(a), float(b), k + 1) for k, (a, b) in enumerate(x)]


def basis_rows(basis: OrthoBasis) -> list[tuple]:
    """Rows ``(k, zt, zv, c, y, fourier, parity)`` for CSV export."""
    return [
        (k + 1, basis.z[k, 0], basis.z[k, 1], basis.c[k], basis.y[k], basis.fourier[k], basis.parity[k])
        for k in range(len(basis))
    ]
