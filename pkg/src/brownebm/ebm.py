"""Extreme learning machine and the energy-based density model built on it.

Seed-to-weights mapping (stable across releases): ``numpy.random.default_rng(seed)``
draws the ``L x d`` input weights with ``standard_normal((L, d))`` and then the
``L`` hidden biases with ``standard_normal(L)``, in that order.

:func:`ebm_train` divides hidden unit ``l``'s weights and bias by the annealing
temperature ``t0 * alpha**(l - 1)``. It then folds per-feature standardization
of the training rows into them, so the stored model evaluates raw rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit, logsumexp

from .series_io import format_float

RIDGE = 1e-8
FORMAT_TAG = "EBM"
FORMAT_VERSION = "v1"


@dataclass(frozen=True)
class ElmModel:
    input_weights: np.ndarray  # L x d
    biases: np.ndarray
    output_weights: np.ndarray
    output_bias: float = 0.0
    seed: int = 0

    @property
    def L(self) -> int:
        return self.input_weights.shape[0]

    @property
    def d(self) -> int:
        return self.input_weights.shape[1]


@dataclass(frozen=True)
class EbmModel:
    elm: ElmModel
    temperatures: np.ndarray
    log_z: float
    train_rows: int
    t0: float
    alpha: float

    @property
    def seed(self) -> int:
        return self.elm.seed


def _as_rows(rows, d: int | None = None) -> np.ndarray:
    X = np.asarray(rows, dtype=float)
    if X.ndim == 1:
        # a bare vector is one row for multi-feature models, else a column of scalars
        X = X[None, :] if d is not None and d > 1 else X[:, None]
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d row matrix, got shape {X.shape}")
    if d is not None and X.shape[1] != d:
        raise ValueError(f"row length {X.shape[1]} does not match model input dimension {d}")
    if not np.all(np.isfinite(X)):
        raise ValueError("rows contain non-finite values")
    return X


def _hidden(X: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Broadcast-and-sum instead of a BLAS matmul: a row's activations then do
    # not depend on which other rows are evaluated with it.
    return expit((X[:, None, :] * W[None, :, :]).sum(axis=2) + b)


def _draw_hidden(seed: int, L: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((L, d))
    b = rng.standard_normal(L)
    return W, b


def _solve_output(H: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    # Ridge least squares on centered activations; the intercept is not penalized.
    L = H.shape[1]
    h_mean = H.mean(axis=0)
    y_mean = float(y.mean())
    A = np.vstack([H - h_mean, math.sqrt(RIDGE) * np.eye(L)])
    rhs = np.concatenate([y - y_mean, np.zeros(L)])
    beta = np.linalg.lstsq(A, rhs, rcond=None)[0]
    return beta, y_mean - float(h_mean @ beta)


def _fit_with(X, y, W, b, seed) -> ElmModel:
    beta, beta0 = _solve_output(_hidden(X, W, b), y)
    for arr in (W, b, beta):
        arr.setflags(write=False)
    return ElmModel(input_weights=W, biases=b, output_weights=beta, output_bias=beta0, seed=seed)


def elm_fit(features, targets, L: int, seed: int) -> ElmModel:
    """Random sigmoid hidden layer of width ``L`` with least-squares output weights."""
    X = _as_rows(features)
    y = np.asarray(targets, dtype=float).ravel()
    if y.shape[0] != X.shape[0]:
        raise ValueError(f"{y.shape[0]} targets for {X.shape[0]} feature rows")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets contain non-finite values")
    if L < 1 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"need L >= 1 and a non-empty feature matrix, got L={L}, shape={X.shape}")
    W, b = _draw_hidden(seed, L, X.shape[1])
    return _fit_with(X, y, W, b, seed)


def elm_predict(model: ElmModel, rows) -> np.ndarray:
    X = _as_rows(rows, model.d)
    H = _hidden(X, model.input_weights, model.biases)
    return (H * model.output_weights).sum(axis=1) + model.output_bias


def elm_eval(model: ElmModel, row) -> float:
    row = np.asarray(row, dtype=float).ravel()
    if row.shape[0] != model.d:
        raise ValueError(f"row length {row.shape[0]} does not match model input dimension {model.d}")
    return float(elm_predict(model, row[None, :])[0])


def gaussian_log_density_target(rows) -> np.ndarray:
    """Log-density of each row under the diagonal Gaussian fitted to ``rows``."""
    X = _as_rows(rows)
    if X.shape[0] < 2:
        raise ValueError("need at least 2 rows to fit a Gaussian")
    mean = X.mean(axis=0)
    var = X.var(axis=0)
    if np.any(var <= 0):
        raise ValueError(f"zero-variance feature(s): {np.flatnonzero(var <= 0).tolist()}")
    z2 = (X - mean) ** 2 / var
    return -0.5 * (z2 + np.log(2 * np.pi * var)).sum(axis=1)


def annealing_schedule(L: int, t0: float, alpha: float) -> np.ndarray:
    if L < 1:
        raise ValueError("L must be >= 1")
    if not t0 > 0:
        raise ValueError(f"t0 must be positive, got {t0}")
    if not 0 < alpha < 1:
        raise ValueError(f"cooling factor must lie in (0, 1), got {alpha}")
    return np.array([t0 * alpha**l for l in range(L)])


def log_partition(elm: ElmModel, rows) -> float:
    """log sum_i exp(elm(row_i)) over the given rows."""
    X = _as_rows(rows, elm.d)
    if X.shape[0] < 1:
        raise ValueError("log_partition needs at least one row")
    return float(logsumexp(elm_predict(elm, X)))


def ebm_train(rows, L: int, t0: float, alpha: float, seed: int) -> EbmModel:
    X = _as_rows(rows)
    temps = annealing_schedule(L, t0, alpha)
    y = gaussian_log_density_target(X)
    W, b = _draw_hidden(seed, L, X.shape[1])
    W /= temps[:, None]
    b /= temps
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    W = W / sd
    b = b - (W * mu).sum(axis=1)
    elm = _fit_with(X, y, W, b, seed)
    temps.setflags(write=False)
    return EbmModel(
        elm=elm,
        temperatures=temps,
        log_z=log_partition(elm, X),
        train_rows=X.shape[0],
        t0=float(t0),
        alpha=float(alpha),
    )


def ebm_energies(model: EbmModel, rows) -> np.ndarray:
    return elm_predict(model.elm, rows) + model.log_z


def ebm_energy(model: EbmModel, row) -> float:
    """Energy of one state; larger means more probable."""
    return elm_eval(model.elm, row) + model.log_z


def training_residual(model: EbmModel, rows) -> float:
    """Mean squared error against the Gaussian log-density targets."""
    X = _as_rows(rows, model.elm.d)
    r = elm_predict(model.elm, X) - gaussian_log_density_target(X)
    return float(np.mean(r * r))


# --- persistence -----------------------------------------------------------

def _line(tag: str, values) -> str:
    return ",".join([tag] + [format_float(float(v)) for v in np.ravel(values)])


def render_model(model: EbmModel) -> str:
    elm = model.elm
    header = ",".join(
        [FORMAT_TAG, FORMAT_VERSION, str(elm.L), str(elm.d), str(elm.seed),
         format_float(model.t0), format_float(model.alpha), format_float(model.log_z)]
    )
    lines = [
        header,
        _line("input_weights", elm.input_weights),
        _line("biases", elm.biases),
        _line("output_weights", elm.output_weights),
        _line("output_bias", [elm.output_bias]),
        _line("temperatures", model.temperatures),
        f"train_rows,{model.train_rows}",
    ]
    return "\n".join(lines) + "\n"


def write_model(model: EbmModel, path) -> None:
    Path(path).write_text(render_model(model), encoding="utf-8")


def parse_model(text: str) -> EbmModel:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty model file")
    head = lines[0].split(",")
    if len(head) != 8 or head[0] != FORMAT_TAG or head[1] != FORMAT_VERSION:
        raise ValueError(f"line 1: expected 'EBM,v1,L,d,seed,t0,alpha,log_z', got {lines[0]!r}")
    try:
        L, d, seed = int(head[2]), int(head[3]), int(head[4])
        t0, alpha, log_z = float(head[5]), float(head[6]), float(head[7])
    except ValueError as exc:
        raise ValueError(f"line 1: {exc}") from None

    tensors = {}
    for lineno, line in enumerate(lines[1:], start=2):
        tag, *cells = line.split(",")
        try:
            tensors[tag] = np.array([float(c) for c in cells])
        except ValueError:
            raise ValueError(f"line {lineno}: unparseable number in {tag!r}") from None
    expected = {"input_weights": L * d, "biases": L, "output_weights": L,
                "output_bias": 1, "temperatures": L, "train_rows": 1}
    for tag, size in expected.items():
        if tag not in tensors:
            raise ValueError(f"missing tensor line {tag!r}")
        if tensors[tag].size != size:
            raise ValueError(f"tensor {tag!r} has {tensors[tag].size} values, expected {size}")

    W = tensors["input_weights"].reshape(L, d)
    for arr in (W, tensors["biases"], tensors["output_weights"], tensors["temperatures"]):
        arr.setflags(write=False)
    elm = ElmModel(W, tensors["biases"], tensors["output_weights"],
                   float(tensors["output_bias"][0]), seed)
    return EbmModel(elm=elm, temperatures=tensors["temperatures"], log_z=log_z,
                    train_rows=int(tensors["train_rows"][0]), t0=t0, alpha=alpha)


def read_model(path) -> EbmModel:
    return parse_model(Path(path).read_text(encoding="utf-8"))
