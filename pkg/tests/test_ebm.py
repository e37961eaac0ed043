import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brownebm.ebm import (
    EbmModel,
    ElmModel,
    annealing_schedule,
    ebm_energies,
    ebm_energy,
    ebm_train,
    elm_eval,
    elm_fit,
    elm_predict,
    gaussian_log_density_target,
    log_partition,
    parse_model,
    read_model,
    render_model,
    training_residual,
    write_model,
)


def _zero_elm(L=3, d=2):
    return ElmModel(np.ones((L, d)), np.zeros(L), np.zeros(L), 0.0, seed=0)


def test_constant_targets_fit_exactly():
    X = np.random.default_rng(0).standard_normal((25, 3))
    m = elm_fit(X, np.full(25, 4.25), L=1, seed=3)
    assert np.max(np.abs(elm_predict(m, X) - 4.25)) <= 1e-8
    assert abs(elm_eval(m, X[7]) - 4.25) <= 1e-8


def test_interpolation_at_width_equal_to_rows():
    # as many Gaussian features as rows keeps the hidden matrix well conditioned
    for seed in range(20):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((20, 20))
        y = rng.standard_normal(20)
        m = elm_fit(X, y, L=20, seed=1000 + seed)
        assert np.max(np.abs(elm_predict(m, X) - y)) < 1e-4


def test_fit_validation():
    X = np.ones((4, 2))
    with pytest.raises(ValueError):
        elm_fit(X, np.ones(3), L=2, seed=0)
    with pytest.raises(ValueError):
        elm_fit(np.array([[1.0, np.inf]]), [1.0], L=2, seed=0)
    with pytest.raises(ValueError):
        elm_fit(X, np.ones(4), L=0, seed=0)


def test_seed_mapping_is_documented_draw_order():
    m = elm_fit(np.ones((3, 2)), [1.0, 2.0, 3.0], L=4, seed=99)
    rng = np.random.default_rng(99)
    np.testing.assert_array_equal(m.input_weights, rng.standard_normal((4, 2)))
    np.testing.assert_array_equal(m.biases, rng.standard_normal(4))


def test_eval_zero_model_and_length_check():
    elm = _zero_elm()
    assert elm_eval(elm, [3.0, -1.0]) == 0.0
    with pytest.raises(ValueError):
        elm_eval(elm, [1.0])


def test_eval_is_bit_reproducible_and_batch_independent():
    X = np.random.default_rng(5).standard_normal((40, 3))
    m = elm_fit(X, X[:, 0] ** 2, L=16, seed=1)
    batch = elm_predict(m, X)
    for i in range(40):
        assert elm_eval(m, X[i]) == batch[i]
    assert elm_eval(m, X[3]) == elm_eval(elm_fit(X, X[:, 0] ** 2, L=16, seed=1), X[3])


def test_gaussian_target():
    t = gaussian_log_density_target([[-1.0], [1.0]])
    np.testing.assert_allclose(t, [-0.5 * math.log(2 * math.pi) - 0.5] * 2, rtol=0, atol=1e-12)
    assert t[0] == pytest.approx(-1.41894, abs=1e-5)
    with pytest.raises(ValueError, match="zero-variance"):
        gaussian_log_density_target([[2.0], [2.0], [2.0]])
    X = np.random.default_rng(1).standard_normal((30, 2))
    np.testing.assert_allclose(
        gaussian_log_density_target(X + 17.5), gaussian_log_density_target(X), atol=1e-12
    )


def test_schedule():
    np.testing.assert_array_equal(annealing_schedule(1, 2.0, 0.5), [2.0])
    np.testing.assert_array_equal(annealing_schedule(3, 2.0, 0.5), [2.0, 1.0, 0.5])
    for bad in [(0, 1.0, 0.5), (2, 0.0, 0.5), (2, 1.0, 1.0), (2, 1.0, 0.0)]:
        with pytest.raises(ValueError):
            annealing_schedule(*bad)


def test_train_schedule_is_exact():
    m = ebm_train(np.random.default_rng(0).standard_normal((50, 1)), 10, 1.5, 0.8, seed=2)
    for l, t in enumerate(m.temperatures):
        assert t == 1.5 * 0.8**l
    assert np.all(np.diff(m.temperatures) < 0)


def test_log_partition_examples():
    elm = _zero_elm()
    rows = np.ones((5, 2))
    assert log_partition(elm, rows) == pytest.approx(math.log(5))
    X = np.random.default_rng(1).standard_normal((20, 2))
    fitted = elm_fit(X, X[:, 0], L=4, seed=0)
    assert log_partition(fitted, X[:1]) == pytest.approx(elm_eval(fitted, X[0]))
    two = ElmModel(np.zeros((1, 1)), np.zeros(1), np.zeros(1), 0.0)
    shifted = ElmModel(np.zeros((1, 1)), np.zeros(1), np.zeros(1), math.log(3))
    h = np.array([elm_eval(two, [0.0]), elm_eval(shifted, [0.0])])
    assert np.log(np.exp(h).sum()) == pytest.approx(math.log(4), abs=1e-12)


def test_log_partition_no_overflow():
    elm = ElmModel(np.zeros((1, 1)), np.zeros(1), np.zeros(1), 1000.0)
    assert log_partition(elm, np.zeros((3, 1))) == pytest.approx(1000.0 + math.log(3))


def test_energy_of_zero_model():
    n = 7
    model = EbmModel(_zero_elm(), np.array([1.0, 0.5, 0.25]), math.log(n), n, 1.0, 0.5)
    for row in ([0.0, 0.0], [5.0, -3.0]):
        assert ebm_energy(model, row) == math.log(n)


@pytest.mark.parametrize("d", [1, 3])
def test_normalization(d):
    for seed in range(5):
        X = np.random.default_rng(seed).standard_normal((120, d))
        m = ebm_train(X, 32, 1.0, 0.9, seed)
        total = np.exp(elm_predict(m.elm, X) - m.log_z).sum()
        assert total == pytest.approx(1.0, abs=1e-9)
        assert m.log_z == log_partition(m.elm, X)


def test_retraining_is_bit_identical():
    X = np.random.default_rng(4).standard_normal((80, 2))
    a, b = ebm_train(X, 16, 2.0, 0.9, 11), ebm_train(X, 16, 2.0, 0.9, 11)
    assert render_model(a) == render_model(b)


def test_density_peaks_at_mean():
    wins = 0
    for seed in range(50):
        x = np.random.default_rng(seed).standard_normal((300, 1)) * 3 + 1
        m = ebm_train(x, 32, 1.0, 0.95, seed)
        mu, sd = x.mean(), x.std(ddof=1)
        wins += ebm_energy(m, [mu]) >= ebm_energy(m, [mu + 4 * sd])
    assert wins >= 45


def test_capacity_grows_with_width():
    better = 0
    for seed in range(50):
        x = np.random.default_rng(seed).standard_normal((500, 1))
        small = training_residual(ebm_train(x, 4, 1.0, 0.95, seed), x)
        large = training_residual(ebm_train(x, 64, 1.0, 0.95, seed), x)
        better += large < small
    assert better >= 45


def test_model_file_round_trip(tmp_path):
    X = np.random.default_rng(8).standard_normal((60, 2))
    m = ebm_train(X, 8, 1.0, 0.9, 3)
    path = tmp_path / "m.ebm"
    write_model(m, path)
    head = path.read_text().splitlines()[0].split(",")
    assert head[:5] == ["EBM", "v1", "8", "2", "3"]
    back = read_model(path)
    assert render_model(back) == render_model(m)
    np.testing.assert_array_equal(ebm_energies(back, X), ebm_energies(m, X))


@pytest.mark.parametrize(
    "text",
    ["", "EBM,v2,1,1,0,1,0.5,0", "EBM,v1,1,1,0,1,0.5,0\ninput_weights,1\n", "EBM,v1,1,1,0,1,0.5,0\ninput_weights,x\n"],
)
def test_model_parse_errors(text):
    with pytest.raises(ValueError):
        parse_model(text)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 24), st.integers(2, 60))
def test_normalization_property(seed, L, n):
    X = np.random.default_rng(seed).standard_normal((n, 2))
    m = ebm_train(X, L, 1.0, 0.9, seed)
    assert np.exp(elm_predict(m.elm, X) - m.log_z).sum() == pytest.approx(1.0, abs=1e-9)
