"""Channel-shared forecasting backbones, training with early stopping, and the K-fold model zoo.

Every backbone maps a lookback ``[l, C]`` to a horizon ``[h, C]`` by applying
the same weights to each channel independently.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import Window, stack_windows
from .errors import ConfigError, DimensionError, NumericalError
from .numeric import (
    Adam,
    LayerParams,
    copy_layers,
    gradient_arrays,
    init_layer,
    mlp_backward,
    mlp_forward,
    parameters,
)

log = logging.getLogger(__name__)

BACKBONES = ("linear", "dlinear", "mlp")


@dataclass
class ForecasterParams:
    backbone: str
    layers: list[LayerParams]
    lookback: int
    horizon: int
    kernel_size: int = 25

    def copy(self) -> "ForecasterParams":
        return ForecasterParams(self.backbone, copy_layers(self.layers), self.lookback,
                                self.horizon, self.kernel_size)


@dataclass
class TrainConfig:
    epochs: int = 50
    patience: int = 3
    batch_size: int = 32
    learning_rate: float = 1e-3
    hidden: int = 128


@dataclass
class EvalReport:
    mae: float
    mse: float
    n_windows: int


def moving_average_matrix(length: int, kernel_size: int) -> np.ndarray:
    """Matrix ``A`` with ``x @ A.T`` = centered moving average, edges replicated."""
    k = min(kernel_size, length if length % 2 else length - 1)
    k = max(k, 1)
    half = (k - 1) // 2
    A = np.zeros((length, length))
    for i in range(length):
        for j in range(i - half, i + half + 1):
            A[i, min(max(j, 0), length - 1)] += 1.0 / k
    return A


def init_forecaster(backbone: str, lookback: int, horizon: int, seed: int,
                    hidden: int = 128, kernel_size: int = 25) -> ForecasterParams:
    if backbone not in BACKBONES:
        raise ConfigError(f"unknown backbone {backbone!r}; choose from {BACKBONES}")
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(lookback)
    if backbone == "linear":
        layers = [init_layer(rng, lookback, horizon, scale=bound)]
    elif backbone == "dlinear":
        layers = [init_layer(rng, lookback, horizon, scale=bound),
                  init_layer(rng, lookback, horizon, scale=bound)]
    else:
        layers = [init_layer(rng, lookback, hidden, "relu", scale=bound),
                  init_layer(rng, hidden, horizon, scale=1.0 / np.sqrt(hidden))]
    return ForecasterParams(backbone, layers, lookback, horizon, kernel_size)


def _flatten_channels(X: np.ndarray) -> np.ndarray:
    n, l, c = X.shape
    return X.transpose(0, 2, 1).reshape(n * c, l)


def _unflatten_channels(flat: np.ndarray, n: int, c: int) -> np.ndarray:
    return flat.reshape(n, c, -1).transpose(0, 2, 1)


def _forward(params: ForecasterParams, X: np.ndarray):
    n, l, c = X.shape
    if l != params.lookback:
        raise DimensionError(f"lookback length {l} != model lookback {params.lookback}")
    flat = _flatten_channels(X)
    if params.backbone == "dlinear":
        A = moving_average_matrix(l, params.kernel_size)
        trend = flat @ A.T
        out_s, cache_s = mlp_forward(params.layers[:1], flat - trend)
        out_t, cache_t = mlp_forward(params.layers[1:], trend)
        return _unflatten_channels(out_s + out_t, n, c), (cache_s, cache_t)
    out, cache = mlp_forward(params.layers, flat)
    return _unflatten_channels(out, n, c), (cache,)


def _backward(params: ForecasterParams, caches, dY: np.ndarray) -> list[np.ndarray]:
    dflat = _flatten_channels(dY)
    grads = []
    for cache in caches:
        g, _ = mlp_backward(cache, dflat)
        grads.extend(gradient_arrays(g))
    return grads


def predict(params: ForecasterParams, lookback: np.ndarray) -> np.ndarray:
    """Forecast ``[h, C]`` from ``[l, C]`` (or a batch ``[N, l, C]``)."""
    X = np.asarray(lookback, dtype=np.float64)
    single = X.ndim == 2
    if single:
        X = X[None]
    if X.ndim != 3:
        raise DimensionError(f"lookback must be [l, C] or [N, l, C], got {X.shape}")
    Y, _ = _forward(params, X)
    return Y[0] if single else Y


def mse_loss_and_grads(params: ForecasterParams, X: np.ndarray,
                       Y: np.ndarray) -> tuple[float, list[np.ndarray]]:
    """Mean squared horizon error and its gradient w.r.t. ``parameters(params.layers)``."""
    pred, caches = _forward(params, X)
    if pred.shape != Y.shape:
        raise DimensionError(f"target shape {Y.shape} != prediction shape {pred.shape}")
    diff = pred - Y
    loss = float(np.mean(diff * diff))
    return loss, _backward(params, caches, 2.0 * diff / diff.size)


def _mse(params: ForecasterParams, X: np.ndarray, Y: np.ndarray) -> float:
    d = predict(params, X) - Y
    return float(np.mean(d * d))


def train_forecaster(train_windows: Sequence[Window], backbone: str = "linear",
                     val_windows: Sequence[Window] | None = None, seed: int = 0,
                     config: TrainConfig | None = None,
                     init: ForecasterParams | None = None) -> ForecasterParams:
    """Minibatch Adam on horizon MSE; returns the parameters with the best validation MSE.

    Without validation windows the training loss drives early stopping.
    """
    cfg = config or TrainConfig()
    if not train_windows:
        raise ConfigError("train_forecaster needs at least one window")
    X, Y = stack_windows(train_windows)
    params = init.copy() if init is not None else init_forecaster(
        backbone, X.shape[1], Y.shape[1], seed, hidden=cfg.hidden)
    if params.horizon != Y.shape[1]:
        raise DimensionError(f"horizon length {Y.shape[1]} != model horizon {params.horizon}")
    if cfg.epochs <= 0:
        return params
    Xv = Yv = None
    if val_windows:
        Xv, Yv = stack_windows(val_windows)

    rng = np.random.default_rng([seed, 1])
    opt = Adam(learning_rate=cfg.learning_rate)
    theta = parameters(params.layers)
    best, best_score, bad = params.copy(), np.inf, 0
    n = X.shape[0]
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, cfg.batch_size):
            idx = order[s:s + cfg.batch_size]
            loss, grads = mse_loss_and_grads(params, X[idx], Y[idx])
            if not np.isfinite(loss):
                raise NumericalError(f"forecaster loss diverged at epoch {epoch}")
            opt.step(theta, grads)
            total += loss * len(idx)
        score = _mse(params, Xv, Yv) if Xv is not None else total / n
        if not np.isfinite(score):
            raise NumericalError(f"forecaster validation loss diverged at epoch {epoch}")
        if score < best_score:
            best, best_score, bad = params.copy(), score, 0
        else:
            bad += 1
            if bad >= cfg.patience:
                break
    log.debug("trained %s forecaster: best score %.6g after %d epochs", backbone, best_score, epoch + 1)
    return best


def evaluate(params: ForecasterParams, eval_windows: Sequence[Window],
             scale: tuple[np.ndarray, np.ndarray] | None = None) -> EvalReport:
    """MAE/MSE over all windows, steps and channels.

    ``scale=(mean, std)`` maps predictions and targets back to raw units first.
    """
    if not eval_windows:
        raise ConfigError("evaluate needs at least one window")
    X, Y = stack_windows(eval_windows)
    P = predict(params, X)
    if scale is not None:
        P, Y = P * scale[1] + scale[0], Y * scale[1] + scale[0]
    d = P - Y
    return EvalReport(float(np.mean(np.abs(d))), float(np.mean(d * d)), len(eval_windows))


@dataclass
class ModelZoo:
    """K forecasters from K-fold training; member k never saw fold k."""

    members: list[ForecasterParams]
    fold_of_window: np.ndarray
    seed: int = 0
    backbone: str = "linear"
    extra: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.members)

    @property
    def lookback(self) -> int:
        return self.members[0].lookback

    def training_indices(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_window != k)

    def scoring_members(self, window_index: int | None = None,
                        include_holdout: bool = False) -> list[int]:
        """Members whose training data covered the window.

        Windows outside the fold map (generated samples) are scored against
        members ``0..K-2``.
        """
        if include_holdout:
            return list(range(self.K))
        if window_index is None or not 0 <= window_index < len(self.fold_of_window):
            return list(range(self.K - 1))
        held = int(self.fold_of_window[window_index])
        return [k for k in range(self.K) if k != held]


def contiguous_folds(n: int, K: int) -> np.ndarray:
    """Fold id per index, K contiguous blocks of near-equal size."""
    fold = np.empty(n, dtype=np.int64)
    for k, block in enumerate(np.array_split(np.arange(n), K)):
        fold[block] = k
    return fold


def build_model_zoo(train_windows: Sequence[Window], K: int = 4, backbone: str = "linear",
                    seed: int = 0, val_windows: Sequence[Window] | None = None,
                    config: TrainConfig | None = None) -> ModelZoo:
    if K < 2:
        raise ConfigError(f"model zoo needs K >= 2, got {K}")
    if len(train_windows) < K:
        raise ConfigError(f"K={K} exceeds the number of training windows ({len(train_windows)})")
    fold = contiguous_folds(len(train_windows), K)
    members = []
    for k in range(K):
        subset = [w for w, f in zip(train_windows, fold) if f != k]
        members.append(train_forecaster(subset, backbone, val_windows, seed + k, config))
    return ModelZoo(members, fold, seed, backbone)
