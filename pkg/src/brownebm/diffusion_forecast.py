"""Diffusion-coefficient fitting, martingale forecasts and Brownian simulation.

All randomness comes from ``numpy.random.default_rng(seed)`` (PCG64).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .markov_mle import SmoothedSeries
from .series_io import SampleSeries

# A block of m Euler steps is taken in one draw only when the distance to the
# nearest barrier exceeds this many block standard deviations. The chance that
# the skipped intermediate positions crossed a barrier is below 2*Phi(-8) ~ 1e-15.
_BLOCK_SAFETY = 8.0


@dataclass(frozen=True)
class ForecastResult:
    horizon: float
    mean: float
    variance: float
    paths: np.ndarray | None = None
    seed: int | None = None


@dataclass(frozen=True)
class TwoPointDist:
    """Zero-mean law on ``{a, b}`` with ``a < 0 < b``."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a < 0.0 < self.b):
            raise ValueError(f"two-point law needs a < 0 < b, got a={self.a}, b={self.b}")

    @property
    def p_a(self) -> float:
        return self.b / (self.b - self.a)

    @property
    def p_b(self) -> float:
        return -self.a / (self.b - self.a)

    @property
    def variance(self) -> float:
        return -self.a * self.b


def fit_sigma2(series: SmoothedSeries) -> float:
    """MLE of the diffusion coefficient, mean of (dx)^2/dt over the segments."""
    t = np.asarray(series.times, dtype=float)
    x = np.asarray(series.values, dtype=float)
    if x.shape[0] < 2:
        raise ValueError("fit_sigma2 needs at least 2 points")
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise ValueError("timestamps must be strictly increasing")
    dx = np.diff(x)
    return float(np.mean(dx * dx / dt))


def forecast(series: SmoothedSeries, horizon: float, sigma2: float) -> ForecastResult:
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not sigma2 >= 0:
        raise ValueError(f"sigma2 must be non-negative, got {sigma2}")
    return ForecastResult(horizon=horizon, mean=float(series.values[-1]), variance=sigma2 * horizon)


def sample_paths(start: float, sigma2: float, dt: float, steps: int, m: int, seed: int) -> np.ndarray:
    """``m x steps`` array; column ``j`` is the position after ``j + 1`` increments."""
    if not dt > 0 or steps < 1 or m < 1:
        raise ValueError(f"invalid path dimensions dt={dt}, steps={steps}, m={m}")
    if not sigma2 >= 0:
        raise ValueError(f"sigma2 must be non-negative, got {sigma2}")
    rng = np.random.default_rng(seed)
    inc = rng.standard_normal((m, steps)) * math.sqrt(sigma2 * dt)
    return start + np.cumsum(inc, axis=1)


def simulate_brownian(steps: int, dt: float, seed: int) -> SampleSeries:
    """Unit-diffusion path on ``steps + 1`` timestamps starting at B_0 = 0."""
    if steps < 1 or not dt > 0:
        raise ValueError(f"invalid simulation parameters steps={steps}, dt={dt}")
    rng = np.random.default_rng(seed)
    values = np.zeros(steps + 1)
    values[1:] = np.cumsum(rng.standard_normal(steps) * math.sqrt(dt))
    times = np.arange(steps + 1) * dt
    return SampleSeries(times, values[:, None], ("b",))


def skorokhod_exit(dist: TwoPointDist, dt: float, trials: int, seed: int) -> tuple[float, float]:
    """Mean first-exit time of (a, b) for unit Brownian motion, and P(hit b).

    Paths are Euler walks with N(0, dt) steps monitored every step. Far from
    the barriers, runs of steps are drawn as a single N(0, m*dt) sum; see
    ``_BLOCK_SAFETY``. All trials are advanced together from one generator,
    so the result depends only on ``seed``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    a, b = dist.a, dist.b
    if not dt > 0 or dt > 0.01 * min(a * a, b * b):
        raise ValueError(f"dt={dt} too coarse for barriers ({a}, {b}); need dt <= 0.01*min(a^2, b^2)")
    rng = np.random.default_rng(seed)
    sd = math.sqrt(dt)
    x = np.zeros(trials)
    n_steps = np.zeros(trials, dtype=np.int64)
    hit_b = np.zeros(trials, dtype=bool)
    active = np.arange(trials)
    while active.size:
        pos = x[active]
        room = np.minimum(pos - a, b - pos)
        block = np.maximum(np.floor((room / (_BLOCK_SAFETY * sd)) ** 2), 1.0)
        pos = pos + rng.standard_normal(active.size) * (sd * np.sqrt(block))
        x[active] = pos
        n_steps[active] += block.astype(np.int64)
        up = pos >= b
        hit_b[active[up]] = True
        active = active[~(up | (pos <= a))]
    return float(n_steps.sum()) * dt / trials, float(np.count_nonzero(hit_b)) / trials
