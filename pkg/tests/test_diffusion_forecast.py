import math

import numpy as np
import pytest

from brownebm.diffusion_forecast import (
    TwoPointDist,
    fit_sigma2,
    forecast,
    sample_paths,
    simulate_brownian,
    skorokhod_exit,
)
from brownebm.markov_mle import SmoothedSeries


def _sm(t, x):
    return SmoothedSeries(np.asarray(t, float), np.asarray(x, float), len(t))


def test_fit_sigma2():
    assert fit_sigma2(_sm(range(5), [0, 1, 0, 1, 0])) == 1.0
    assert fit_sigma2(_sm(range(4), [3, 3, 3, 3])) == 0.0
    assert fit_sigma2(_sm([0, 4], [0, 2])) == 1.0
    with pytest.raises(ValueError):
        fit_sigma2(_sm([0], [1]))


def test_forecast():
    sm = _sm([0, 1, 2], [1, 3, 5])
    r = forecast(sm, 2.0, 1.0)
    assert (r.mean, r.variance) == (5.0, 2.0)
    assert forecast(sm, 7.0, 0.0).variance == 0.0
    assert forecast(sm, 6.0, 0.3).variance == 2 * forecast(sm, 3.0, 0.3).variance
    with pytest.raises(ValueError):
        forecast(sm, 0.0, 1.0)
    with pytest.raises(ValueError):
        forecast(sm, 1.0, -1.0)


def test_sample_paths():
    flat = sample_paths(2.5, 0.0, 0.1, 5, 3, seed=1)
    assert flat.shape == (3, 5) and np.all(flat == 2.5)
    a = sample_paths(0.0, 1.0, 1.0, 4, 6, seed=9)
    b = sample_paths(0.0, 1.0, 1.0, 4, 6, seed=9)
    assert a.tobytes() == b.tobytes()
    with pytest.raises(ValueError):
        sample_paths(0.0, 1.0, 0.0, 4, 6, seed=9)


def test_endpoint_variance_band():
    ends = sample_paths(0.0, 1.0, 1.0, 1, 10_000, seed=3)[:, -1]
    assert 0.94 <= np.var(ends, ddof=1) <= 1.06


@pytest.mark.parametrize("steps, dt", [(1, 1.0), (4, 0.5), (10, 0.3)])
def test_variance_linear_in_time(steps, dt):
    m = 10_000
    ends = sample_paths(0.0, 2.0, dt, steps, m, seed=steps)[:, -1]
    target = 2.0 * steps * dt
    # 3 sigma band for a sample variance of m Gaussian draws
    assert abs(np.var(ends, ddof=1) - target) <= 3 * target * math.sqrt(2 / (m - 1))


def test_simulate_brownian():
    for seed in range(20):
        s = simulate_brownian(10, 0.5, seed)
        assert s.values[0, 0] == 0.0
        assert len(s) == 11 and s.times[-1] == 5.0
    one = simulate_brownian(1, 1.0, 4)
    assert len(one) == 2
    with pytest.raises(ValueError):
        simulate_brownian(0, 1.0, 0)


def test_simulated_increment_means():
    steps, dt = 400, 0.25
    for seed in range(10):
        inc = np.diff(simulate_brownian(steps, dt, seed).values[:, 0])
        # the mean of `steps` N(0, dt) increments has sd sqrt(dt / steps)
        assert abs(inc.mean()) <= 3 * math.sqrt(dt / steps)


def test_two_point_dist():
    d = TwoPointDist(-2.0, 1.0)
    assert d.p_a + d.p_b == 1.0
    assert abs(d.a * d.p_a + d.b * d.p_b) < 1e-12
    assert d.variance == 2.0
    for a, b in [(0.0, 1.0), (-1.0, 0.0), (1.0, 2.0)]:
        with pytest.raises(ValueError):
            TwoPointDist(a, b)


def test_skorokhod_small_scale():
    mean_t, hit = skorokhod_exit(TwoPointDist(-1.0, 1.0), 1e-3, 4000, seed=0)
    # sd of exit time for (-1, 1) is sqrt(2/3); allow 4 sigma plus discretization bias
    assert abs(mean_t - 1.0) < 4 * math.sqrt(2 / 3 / 4000) + 0.05
    assert abs(hit - 0.5) < 4 * math.sqrt(0.25 / 4000)


def test_skorokhod_deterministic_and_validated():
    d = TwoPointDist(-1.0, 2.0)
    assert skorokhod_exit(d, 1e-3, 200, 5) == skorokhod_exit(d, 1e-3, 200, 5)
    with pytest.raises(ValueError, match="coarse"):
        skorokhod_exit(d, 0.05, 10, 0)
    with pytest.raises(ValueError):
        skorokhod_exit(d, 1e-3, 0, 0)


def test_block_jumps_match_plain_walk():
    # plain step-by-step Euler walk as an independent reference
    a, b, dt, trials = -0.5, 0.5, 1e-3, 3000
    rng = np.random.default_rng(11)
    steps = np.zeros(trials)
    ups = 0
    for i in range(trials):
        x, n = 0.0, 0
        while a < x < b:
            x += rng.standard_normal() * math.sqrt(dt)
            n += 1
        steps[i] = n * dt
        ups += x >= b
    fast_t, fast_hit = skorokhod_exit(TwoPointDist(a, b), dt, trials, 12)
    se = math.sqrt(np.var(steps) / trials)
    assert abs(fast_t - steps.mean()) < 5 * math.sqrt(2) * se
    assert abs(fast_hit - ups / trials) < 5 * math.sqrt(0.5 / trials)
