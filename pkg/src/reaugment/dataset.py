"""CSV ingestion, chronological train/val/test splits and sliding windows."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DimensionError, FormatError

STD_FLOOR = 1e-8

# (train, val, test) time points per benchmark, standard and few-shot.
BENCHMARK_PARTITIONS: dict[str, dict[str, tuple[int, int, int]]] = {
    "ETTh1": {"standard": (8545, 2881, 2881), "fewshot": (2681, 2881, 2881)},
    "ETTh2": {"standard": (8545, 2881, 2881), "fewshot": (2681, 2881, 2881)},
    "ETTm1": {"standard": (34465, 11521, 11521), "fewshot": (5751, 11521, 11521)},
    "ETTm2": {"standard": (34465, 11521, 11521), "fewshot": (5751, 11521, 11521)},
    "Traffic": {"standard": (12185, 1757, 3509), "fewshot": (3490, 1757, 3509)},
    "Electricity": {"standard": (18317, 2633, 5261), "fewshot": (5242, 2633, 5261)},
    "Weather": {"standard": (36792, 5271, 10540), "fewshot": (5260, 5271, 10540)},
    "Exchange": {"standard": (5120, 665, 1422), "fewshot": (1441, 665, 1422)},
}

BENCHMARK_FEATURES = {
    "ETTh1": 7, "ETTh2": 7, "ETTm1": 7, "ETTm2": 7,
    "Traffic": 862, "Electricity": 321, "Weather": 21, "Exchange": 8,
}


@dataclass(frozen=True)
class SplitSpec:
    mode: str = "standard"
    fewshot_fraction: float = 1.0

    def __post_init__(self):
        if self.mode not in ("standard", "fewshot"):
            raise ConfigError(f"split mode must be 'standard' or 'fewshot', got {self.mode!r}")
        if not 0.0 < self.fewshot_fraction <= 1.0:
            raise ConfigError(f"fewshot_fraction must be in (0, 1], got {self.fewshot_fraction}")

    @classmethod
    def benchmark(cls, name: str, mode: str) -> tuple["SplitSpec", tuple[int, int, int]]:
        """Spec and standard partition reproducing a standard benchmark split."""
        parts = BENCHMARK_PARTITIONS[name]
        if mode == "standard":
            return cls("standard"), parts["standard"]
        frac = parts["fewshot"][0] / parts["standard"][0]
        return cls("fewshot", frac), parts["standard"]


@dataclass(frozen=True)
class Window:
    lookback: np.ndarray
    horizon: np.ndarray
    timestamps: np.ndarray
    origin_index: int

    @property
    def values(self) -> np.ndarray:
        """Full window ``[l + h, C]``."""
        return np.concatenate([self.lookback, self.horizon], axis=0)

    @property
    def lookback_len(self) -> int:
        return self.lookback.shape[0]


@dataclass(frozen=True)
class TimeSeriesDataset:
    """Raw values ``[T, C]`` plus split bounds and train-fitted normalization.

    ``bounds`` holds half-open ``(start, stop)`` index ranges for each split.
    The few-shot train range is a prefix of the standard train range, so there
    can be a gap between ``train`` and ``val``.
    """

    values: np.ndarray
    timestamps: np.ndarray
    columns: tuple[str, ...]
    bounds: dict | None = None
    mean: np.ndarray | None = None
    std: np.ndarray | None = None

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    @property
    def is_split(self) -> bool:
        return self.bounds is not None

    @property
    def split(self) -> tuple[int, int]:
        """``(train_end, val_end)``."""
        self._require_split()
        return self.bounds["train"][1], self.bounds["val"][1]

    def partition(self) -> tuple[int, int, int]:
        self._require_split()
        return tuple(b - a for a, b in (self.bounds[k] for k in ("train", "val", "test")))

    def _require_split(self) -> None:
        if self.bounds is None:
            raise ConfigError("dataset has no splits; call make_splits first")

    def normalized(self) -> np.ndarray:
        self._require_split()
        return (self.values - self.mean) / self.std

    def split_values(self, split: str, normalized: bool = True) -> np.ndarray:
        self._require_split()
        a, b = self.bounds[split]
        data = self.normalized() if normalized else self.values
        return data[a:b]

    def time_range(self, split: str) -> tuple[float, float]:
        self._require_split()
        a, b = self.bounds[split]
        return float(self.timestamps[a]), float(self.timestamps[b - 1])


def _parse_time(text: str) -> float | datetime:
    try:
        return float(text)
    except ValueError:
        return datetime.fromisoformat(text.strip())


def load_csv(path: str | Path, timestamp_column: str | None = None,
             feature_columns: Sequence[str] | None = None) -> TimeSeriesDataset:
    """Read a header-row CSV whose rows are strictly increasing in time.

    The timestamp column (first column by default) is only used to check
    ordering; per-step timestamps become the normalized positions ``i / (T-1)``.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        ts_col = header[0] if timestamp_column is None else timestamp_column
        if ts_col not in header:
            raise FormatError(f"{path}: timestamp column {ts_col!r} not in header")
        if feature_columns is None:
            feature_columns = [h for h in header if h != ts_col]
        missing = [c for c in feature_columns if c not in header]
        if missing:
            raise FormatError(f"{path}: feature columns {missing} not in header")
        ts_idx = header.index(ts_col)
        feat_idx = [header.index(c) for c in feature_columns]

        rows, prev = [], None
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                t = _parse_time(row[ts_idx])
            except (ValueError, IndexError):
                raise FormatError(f"{path}: row {lineno}: unparsable timestamp") from None
            if prev is not None:
                try:
                    ordered = t > prev
                except TypeError:
                    raise FormatError(f"{path}: row {lineno}: mixed timestamp formats") from None
                if not ordered:
                    raise FormatError(f"{path}: row {lineno}: timestamp not strictly increasing")
            prev = t
            vals = []
            for j in feat_idx:
                try:
                    v = float(row[j])
                except (ValueError, IndexError):
                    raise FormatError(
                        f"{path}: row {lineno}, column {header[j] if j < len(header) else j!r}: "
                        f"cannot parse value"
                    ) from None
                if not np.isfinite(v):
                    raise FormatError(f"{path}: row {lineno}, column {header[j]!r}: missing value")
                vals.append(v)
            rows.append(vals)
    if len(rows) < 2:
        raise FormatError(f"{path}: need at least two data rows")
    values = np.asarray(rows, dtype=np.float64)
    return from_array(values, columns=tuple(feature_columns))


def from_array(values: np.ndarray, columns: Sequence[str] | None = None) -> TimeSeriesDataset:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2 or values.shape[0] < 2:
        raise DimensionError(f"values must be [T >= 2, C], got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise FormatError("values contain NaN or Inf")
    T = values.shape[0]
    if columns is None:
        columns = tuple(f"ch{i}" for i in range(values.shape[1]))
    return TimeSeriesDataset(values, np.arange(T) / (T - 1), tuple(columns))


def make_splits(ds: TimeSeriesDataset, spec: SplitSpec,
                partition: tuple[int, int, int]) -> TimeSeriesDataset:
    """Chronological (train, val, test) split; few-shot keeps the earliest train prefix."""
    n_train, n_val, n_test = (int(n) for n in partition)
    if min(n_train, n_val, n_test) <= 0:
        raise ConfigError(f"partition sizes must be positive, got {partition}")
    if n_train + n_val + n_test > ds.length:
        raise ConfigError(f"partition {partition} exceeds series length {ds.length}")
    kept = n_train
    if spec.mode == "fewshot":
        kept = max(1, int(np.floor(n_train * spec.fewshot_fraction + 0.5)))
    bounds = {
        "train": (0, kept),
        "val": (n_train, n_train + n_val),
        "test": (n_train + n_val, n_train + n_val + n_test),
    }
    train = ds.values[:kept]
    mean = train.mean(axis=0)
    std = np.maximum(train.std(axis=0), STD_FLOOR)
    return replace(ds, bounds=bounds, mean=mean, std=std)


def windows(ds: TimeSeriesDataset, split: str, lookback: int, horizon: int,
            stride: int = 1) -> list[Window]:
    """Sliding windows fully inside one split; ``origin_index`` is the global start index."""
    if lookback <= 0 or horizon <= 0 or stride <= 0:
        raise ConfigError("lookback, horizon and stride must be positive")
    data = ds.split_values(split)
    start = ds.bounds[split][0]
    span = lookback + horizon
    n = data.shape[0]
    if n < span:
        raise ConfigError(f"{split} split has {n} steps, need at least {span}")
    out = []
    for o in range(0, n - span + 1, stride):
        out.append(Window(
            lookback=data[o:o + lookback].copy(),
            horizon=data[o + lookback:o + span].copy(),
            timestamps=ds.timestamps[start + o:start + o + span].copy(),
            origin_index=start + o,
        ))
    return out


def denormalize(ds: TimeSeriesDataset, tensor: np.ndarray) -> np.ndarray:
    tensor = np.asarray(tensor, dtype=np.float64)
    if tensor.shape[-1] != ds.channels:
        raise DimensionError(f"last axis {tensor.shape[-1]} != channels {ds.channels}")
    return tensor * ds.std + ds.mean


def stack_windows(ws: Sequence[Window]) -> tuple[np.ndarray, np.ndarray]:
    """``(X [N, l, C], Y [N, h, C])``."""
    if not ws:
        raise ConfigError("no windows to stack")
    return np.stack([w.lookback for w in ws]), np.stack([w.horizon for w in ws])


def stack_full(ws: Sequence[Window]) -> tuple[np.ndarray, np.ndarray]:
    """``(S [N, l+h, C], timestamps [N, l+h])``."""
    if not ws:
        raise ConfigError("no windows to stack")
    return np.stack([w.values for w in ws]), np.stack([w.timestamps for w in ws])


def window_from_full(values: np.ndarray, timestamps: np.ndarray, lookback: int,
                     origin_index: int = -1) -> Window:
    return Window(values[:lookback].copy(), values[lookback:].copy(),
                  np.asarray(timestamps, dtype=np.float64).copy(), origin_index)
