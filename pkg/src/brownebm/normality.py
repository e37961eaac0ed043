"""Shapiro-Wilk normality test (Royston 1992, algorithm AS R94).

Coefficients and the p-value use Royston's polynomial approximations, valid
for sample sizes 3 through 5000.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr, ndtri

from .series_io import SampleSeries

N_MIN = 3
N_MAX = 5000

# Polynomial coefficients, lowest order first.
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coef, x: float) -> float:
    result = 0.0
    for c in reversed(coef):
        result = result * x + c
    return result


@dataclass(frozen=True)
class SwCoefficients:
    n: int
    a: np.ndarray


@dataclass(frozen=True)
class SwResult:
    w: float
    p_value: float
    reject_normality: bool
    n: int


@lru_cache(maxsize=256)
def _upper_half(n: int) -> tuple[float, ...]:
    # Weights for x_(n), x_(n-1), ..., applied to the upper half of the sorted sample.
    half = n // 2
    if n == 3:
        return (math.sqrt(0.5),)
    m = ndtri((np.arange(1, half + 1) - 0.375) / (n + 0.25))
    summ2 = 2.0 * float(np.dot(m, m))
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a = np.empty(half)
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    if n > 5:
        a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1**2 - 2 * a2**2))
        a[1] = a2
        first = 2
    else:
        fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1**2))
        first = 1
    a[0] = a1
    a[first:] = -m[first:] / fac
    return tuple(a)


def sw_coefficients(n: int) -> SwCoefficients:
    """Antisymmetric weights ``a`` for the ascending order statistics of a size-``n`` sample."""
    if not N_MIN <= n <= N_MAX:
        raise ValueError(f"Shapiro-Wilk needs {N_MIN} <= n <= {N_MAX}, got n={n}")
    upper = np.array(_upper_half(n))
    a = np.zeros(n)
    half = n // 2
    a[n - half:] = upper[::-1]
    a[:half] = -upper
    a.setflags(write=False)
    return SwCoefficients(n=n, a=a)


def _p_value(w: float, n: int) -> float:
    if n == 3:
        # exact distribution for n = 3
        pw = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - math.pi / 3.0)
        return min(max(pw, 0.0), 1.0)
    w1 = 1.0 - w
    if w1 <= 0.0:
        return 1.0
    y = math.log(w1)
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return 1e-99
        y = -math.log(gamma - y)
        mean = _poly(_C3, n)
        sd = math.exp(_poly(_C4, n))
    else:
        xx = math.log(n)
        mean = _poly(_C5, xx)
        sd = math.exp(_poly(_C6, xx))
    return float(ndtr(-(y - mean) / sd))


def sw_statistic(sample, alpha: float = 0.05) -> SwResult:
    """W statistic and Royston p-value for ``sample``.

    Ties are fine; a constant sample is rejected because W is undefined.
    """
    x = np.sort(np.asarray(sample, dtype=float), kind="stable")
    n = x.shape[0]
    if n < N_MIN:
        raise ValueError(f"Shapiro-Wilk needs at least {N_MIN} observations, got {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    if x[-1] - x[0] == 0.0:
        raise ValueError("sample has zero variance (constant)")
    a = sw_coefficients(n).a
    # center and scale first: W is affine-invariant and this keeps sums well conditioned
    z = (x - x.mean()) / (x[-1] - x[0])
    ssq = float(np.dot(z, z))
    w = float(np.dot(a, z)) ** 2 / ssq
    w = min(w, 1.0)
    p = _p_value(w, n)
    return SwResult(w=w, p_value=p, reject_normality=p < alpha, n=n)


def sw_test_increments(series: SampleSeries, feature: int = 0, alpha: float = 0.05) -> SwResult:
    """Test the first differences of one feature for normality."""
    values = series.column(feature)
    if values.shape[0] < N_MIN + 1:
        raise ValueError(f"need at least {N_MIN + 1} samples to test increments, got {values.shape[0]}")
    return sw_statistic(np.diff(values), alpha=alpha)
