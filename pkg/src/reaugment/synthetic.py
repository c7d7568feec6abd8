"""Synthetic series for tests, demos and desk-scale experiments."""

from __future__ import annotations

import numpy as np

from .dataset import TimeSeriesDataset, from_array


def multi_sinusoid(T: int = 5000, C: int = 3, seed: int = 0, periods=(24, 48, 168),
                   noise: float = 0.3, drift: float = 0.0) -> TimeSeriesDataset:
    """Per-channel sum of sinusoids with random phases/amplitudes plus white noise.

    ``drift`` adds a linear amplitude change over the series so later
    segments differ in distribution from earlier ones.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(T, dtype=np.float64)
    out = np.zeros((T, C))
    for c in range(C):
        for p in periods:
            amp = rng.uniform(0.5, 1.5)
            phase = rng.uniform(0, 2 * np.pi)
            out[:, c] += amp * np.sin(2 * np.pi * t / p + phase)
        out[:, c] *= 1.0 + drift * t / T
    out += noise * rng.standard_normal((T, C))
    return from_array(out, [f"s{c}" for c in range(C)])


def linear_trend(T: int = 1000, slope: float = 0.01, C: int = 1) -> TimeSeriesDataset:
    return from_array(np.tile(slope * np.arange(T, dtype=np.float64)[:, None], (1, C)))


def noisy_regime(T: int = 2000, C: int = 1, seed: int = 0, regime: tuple[int, int] = (0, 400),
                 noise: float = 0.05, regime_noise: float = 1.5, period: int = 24) -> TimeSeriesDataset:
    """Clean periodic signal with one block of heavy additive noise.

    Windows overlapping ``regime`` are the ones a model zoo disagrees on.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(T, dtype=np.float64)
    base = np.stack([np.sin(2 * np.pi * t / period + rng.uniform(0, 2 * np.pi)) for _ in range(C)], axis=1)
    scale = np.full(T, noise)
    scale[regime[0]:regime[1]] = regime_noise
    return from_array(base + scale[:, None] * rng.standard_normal((T, C)))
