"""Model-zoo variance per window, anchor selection and the Group A/B comparison."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import TimeSeriesDataset, Window, stack_windows, windows
from .errors import ConfigError
from .forecaster import EvalReport, ModelZoo, TrainConfig, evaluate, predict, train_forecaster


@dataclass(frozen=True)
class VarianceRecord:
    window_index: int
    errors: np.ndarray
    mean_error: float
    variance: float


@dataclass(frozen=True)
class AnchorSet:
    indices: tuple[int, ...]
    fraction: float


def member_errors(lookback: np.ndarray, horizon: np.ndarray, zoo: ModelZoo,
                  members: Sequence[int]) -> np.ndarray:
    """Squared horizon error ``||y - f_k(x)||^2`` for each listed member.

    Accepts a single window (``[l, C]``/``[h, C]``) or a batch with a leading axis,
    in which case the result is ``[N, len(members)]``.
    """
    X = np.asarray(lookback, dtype=np.float64)
    Y = np.asarray(horizon, dtype=np.float64)
    single = X.ndim == 2
    if single:
        X, Y = X[None], Y[None]
    errs = np.empty((X.shape[0], len(members)))
    for j, k in enumerate(members):
        d = predict(zoo.members[k], X) - Y
        errs[:, j] = np.sum(d * d, axis=(1, 2))
    return errs[0] if single else errs


def variance_of_errors(errors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and population variance over the last axis."""
    mean = errors.mean(axis=-1)
    dev = errors - mean[..., None]
    return mean, np.mean(dev * dev, axis=-1)


def model_zoo_variance(window: Window, zoo: ModelZoo, window_index: int | None = None,
                       include_holdout: bool = False) -> VarianceRecord:
    """Variance of squared horizon errors over the members trained on the window.

    ``window_index`` locates the window in the zoo's fold map; without it (or for
    generated windows) members ``0..K-2`` are used.
    """
    members = zoo.scoring_members(window_index, include_holdout)
    errs = member_errors(window.lookback, window.horizon, zoo, members)
    mean, var = variance_of_errors(errs)
    idx = window.origin_index if window_index is None else window_index
    return VarianceRecord(int(idx), errs, float(mean), float(var))


def zoo_variances(train_windows: Sequence[Window], zoo: ModelZoo,
                  include_holdout: bool = False) -> list[VarianceRecord]:
    """Score every training window; record ``window_index`` is the position in the list."""
    X, Y = stack_windows(train_windows)
    n = X.shape[0]
    if n != len(zoo.fold_of_window):
        raise ConfigError(f"{n} windows but the zoo fold map covers {len(zoo.fold_of_window)}")
    all_errs = member_errors(X, Y, zoo, list(range(zoo.K)))
    records = []
    for i in range(n):
        cols = zoo.scoring_members(i, include_holdout)
        errs = all_errs[i, cols]
        mean, var = variance_of_errors(errs)
        records.append(VarianceRecord(i, errs, float(mean), float(var)))
    return records


def anchor_count(total: int, fraction: float) -> int:
    return max(1, int(np.floor(fraction * total + 0.5)))


def rank_and_split(records: Sequence[VarianceRecord],
                   fraction: float = 0.5) -> tuple[AnchorSet, list[int]]:
    """Top-``fraction`` windows by variance (ties: lower index first) and the rest."""
    if not records:
        raise ConfigError("rank_and_split needs at least one record")
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"anchor fraction must be in (0, 1], got {fraction}")
    order = sorted(records, key=lambda r: (-r.variance, r.window_index))
    n = anchor_count(len(records), fraction)
    top = sorted(r.window_index for r in order[:n])
    rest = sorted(r.window_index for r in order[n:])
    return AnchorSet(tuple(top), fraction), rest


def write_rank_csv(path: str | Path, records: Sequence[VarianceRecord], anchors: AnchorSet) -> None:
    chosen = set(anchors.indices)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["window_index", "mean_error", "variance", "is_anchor"])
        for r in records:
            w.writerow([r.window_index, repr(r.mean_error), repr(r.variance), int(r.window_index in chosen)])


def read_rank_csv(path: str | Path) -> tuple[list[tuple[int, float, float]], AnchorSet, float]:
    rows, chosen = [], []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            i = int(row["window_index"])
            rows.append((i, float(row["mean_error"]), float(row["variance"])))
            if int(row["is_anchor"]):
                chosen.append(i)
    frac = len(chosen) / len(rows) if rows else 0.0
    return rows, AnchorSet(tuple(sorted(chosen)), frac), frac


def group_ab_experiment(ds: TimeSeriesDataset, zoo: ModelZoo, backbone: str = "linear",
                        seed: int = 0, horizon: int | None = None,
                        config: TrainConfig | None = None,
                        fraction: float = 0.5) -> tuple[EvalReport, EvalReport]:
    """Train on the high-variance half (A) and the low-variance half (B); test both."""
    l = zoo.lookback
    h = horizon if horizon is not None else zoo.members[0].horizon
    train = windows(ds, "train", l, h)
    val = windows(ds, "val", l, h)
    test = windows(ds, "test", l, h)
    anchors, rest = rank_and_split(zoo_variances(train, zoo), fraction)
    group_a = [train[i] for i in anchors.indices]
    group_b = [train[i] for i in rest]
    model_a = train_forecaster(group_a, backbone, val, seed, config)
    model_b = train_forecaster(group_b, backbone, val, seed, config)
    return evaluate(model_a, test), evaluate(model_b, test)
