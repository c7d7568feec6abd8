"""Augmented-window generation, corpus assembly and the noise/smoothing baselines."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.ndimage import convolve1d

from .dataset import Window
from .errors import ConfigError
from .vmae import VmaePolicy, apply_mask, reconstruct

PROVENANCES = ("reaugment", "gaussian", "convolve", "original")


@dataclass(frozen=True)
class AugmentedWindow:
    window: Window
    anchor_index: int
    latent_seed: int
    timestamps_shifted: np.ndarray
    provenance: str
    record: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class AugmentationPlan:
    anchor_fraction: float
    multiplier: int
    target_total: int
    n_original: int
    n_anchors: int

    @property
    def n_generated(self) -> int:
        return max(0, min(self.target_total - self.n_original, self.multiplier * self.n_anchors))


def make_plan(n_original: int, n_anchors: int, factor: int = 3,
              multiplier: int | None = None) -> AugmentationPlan:
    """Plan for a corpus ``factor`` times the original size; each original appears once."""
    if n_original <= 0 or n_anchors <= 0:
        raise ConfigError("plan needs at least one original window and one anchor")
    if n_anchors > n_original:
        raise ConfigError(f"{n_anchors} anchors exceed {n_original} original windows")
    target = factor * n_original
    if multiplier is None:
        multiplier = math.ceil((target - n_original) / n_anchors)
    elif multiplier < 0:
        raise ConfigError("multiplier must be non-negative")
    return AugmentationPlan(n_anchors / n_original, int(multiplier), target, n_original, n_anchors)


def shift_timestamps(timestamps: np.ndarray, test_range: tuple[float, float],
                     rng: np.random.Generator) -> np.ndarray:
    """Move a window's timestamps to a uniform start inside ``test_range``, keeping spacing."""
    ts = np.asarray(timestamps, dtype=np.float64)
    lo, hi = float(test_range[0]), float(test_range[1])
    if not lo < hi:
        raise ConfigError(f"test range must satisfy lo < hi, got {test_range}")
    span = ts[..., -1] - ts[..., 0]
    if np.any(span > hi - lo):
        raise ConfigError(f"window span {np.max(span)} exceeds the test range width {hi - lo}")
    start = rng.uniform(lo, hi - span)
    out = ts - ts[..., :1] + np.asarray(start)[..., None] if ts.ndim > 1 else ts - ts[0] + start
    return out


def _sample_seeds(base_seed: int, anchor_index: int, replica: int) -> dict:
    mask_ss, ts_ss, latent_ss = np.random.SeedSequence(
        base_seed, spawn_key=(anchor_index, replica)).spawn(3)
    return {
        "mask_seed": int(mask_ss.generate_state(1, np.uint64)[0]),
        "timestamp_seed": int(ts_ss.generate_state(1, np.uint64)[0]),
        "latent_seed": int(latent_ss.generate_state(1, np.uint64)[0]),
    }


def generate_one(policy: VmaePolicy, anchor: Window, record: dict,
                 test_range: tuple[float, float] | None) -> AugmentedWindow:
    """Rebuild one generated window from its provenance record."""
    values = anchor.values
    ts = anchor.timestamps
    if test_range is not None:
        ts = shift_timestamps(ts, test_range, np.random.default_rng(record["timestamp_seed"]))
    masked = apply_mask(values, policy.mask_rate, np.random.default_rng(record["mask_seed"]), ts)
    noise = np.random.default_rng(record["latent_seed"]).standard_normal(policy.d_z)
    s_hat = reconstruct(policy, masked, noise=noise[None])
    l = anchor.lookback_len
    win = Window(s_hat[:l].copy(), s_hat[l:].copy(), ts.copy(), anchor.origin_index)
    return AugmentedWindow(win, record["anchor_index"], record["latent_seed"], ts.copy(),
                           "reaugment", dict(record))


def generate(policy: VmaePolicy, anchors: Sequence[Window], anchor_indices: Sequence[int],
             plan: AugmentationPlan, test_range: tuple[float, float] | None,
             seed: int = 0) -> list[AugmentedWindow]:
    """``plan.multiplier`` prior samples per anchor, truncated to the plan target.

    Every sample draws its mask, timestamp shift and latent noise from seeds
    derived from ``(seed, anchor_index, replica)``, stored in its record.
    """
    if len(anchors) != len(anchor_indices):
        raise ConfigError("anchors and anchor_indices differ in length")
    out: list[AugmentedWindow] = []
    budget = plan.n_generated
    for replica in range(plan.multiplier):
        for anchor, idx in zip(anchors, anchor_indices):
            if len(out) >= budget:
                return out
            record = {"anchor_index": int(idx), "replica": replica, "seed": int(seed),
                      **_sample_seeds(seed, int(idx), replica)}
            out.append(generate_one(policy, anchor, record, test_range))
    return out


def gaussian_baseline(windows: Sequence[Window], sigma: float,
                      rng: np.random.Generator) -> list[AugmentedWindow]:
    """Add i.i.d. ``N(0, sigma^2)`` noise to every value."""
    if sigma < 0:
        raise ConfigError(f"sigma must be non-negative, got {sigma}")
    out = []
    for i, w in enumerate(windows):
        v = w.values + sigma * rng.standard_normal(w.values.shape)
        l = w.lookback_len
        nw = Window(v[:l], v[l:], w.timestamps.copy(), w.origin_index)
        out.append(AugmentedWindow(nw, i, -1, w.timestamps.copy(), "gaussian"))
    return out


def convolve_baseline(windows: Sequence[Window], kernel: Sequence[float] | None = None) -> list[AugmentedWindow]:
    """Per-channel convolution along time with edge replication (default: 5-point mean)."""
    k = np.full(5, 0.2) if kernel is None else np.asarray(kernel, dtype=np.float64)
    if k.ndim != 1 or len(k) % 2 == 0:
        raise ConfigError(f"kernel length must be odd, got {len(k)}")
    out = []
    for i, w in enumerate(windows):
        if len(k) > w.values.shape[0]:
            raise ConfigError("kernel longer than the window")
        v = convolve1d(w.values, k, axis=0, mode="nearest")
        l = w.lookback_len
        nw = Window(v[:l], v[l:], w.timestamps.copy(), w.origin_index)
        out.append(AugmentedWindow(nw, i, -1, w.timestamps.copy(), "convolve"))
    return out


def baseline_corpus_windows(train: Sequence[Window], kind: str, seed: int = 0, factor: int = 3,
                            sigma: float = 0.1, kernel: Sequence[float] | None = None) -> list[AugmentedWindow]:
    """Enough baseline copies of the training windows for a ``factor``-sized corpus."""
    if kind not in ("gaussian", "convolve"):
        raise ConfigError(f"unknown baseline {kind!r}")
    rng = np.random.default_rng(seed)
    out: list[AugmentedWindow] = []
    need = (factor - 1) * len(train)
    while len(out) < need:
        batch = gaussian_baseline(train, sigma, rng) if kind == "gaussian" else convolve_baseline(train, kernel)
        out.extend(batch[:need - len(out)])
    return out


def assemble_corpus(original: Sequence[Window], augmented: Sequence[AugmentedWindow],
                    seed: int = 0) -> list[AugmentedWindow]:
    """Originals plus augmented samples, shuffled with ``seed``."""
    items = [AugmentedWindow(w, i, -1, w.timestamps, "original") for i, w in enumerate(original)]
    items.extend(augmented)
    if items:
        ref = (items[0].window.lookback.shape, items[0].window.horizon.shape)
        for a in items:
            if (a.window.lookback.shape, a.window.horizon.shape) != ref:
                raise ConfigError(
                    f"corpus shape mismatch: {a.provenance} window has "
                    f"{(a.window.lookback.shape, a.window.horizon.shape)}, expected {ref}"
                )
    order = np.random.default_rng(seed).permutation(len(items))
    return [items[i] for i in order]


def corpus_hash(corpus: Sequence[AugmentedWindow]) -> str:
    h = hashlib.sha256()
    for a in corpus:
        h.update(a.provenance.encode())
        h.update(np.ascontiguousarray(a.window.lookback).tobytes())
        h.update(np.ascontiguousarray(a.window.horizon).tobytes())
        h.update(np.ascontiguousarray(a.window.timestamps).tobytes())
    return h.hexdigest()


def save_corpus(path: str | Path, corpus: Sequence[AugmentedWindow]) -> Path:
    """Write ``<path>.npz`` with stacked windows and ``<path>.provenance.jsonl``."""
    path = Path(path)
    npz = path.with_suffix(".npz")
    np.savez(npz,
             lookback=np.stack([a.window.lookback for a in corpus]),
             horizon=np.stack([a.window.horizon for a in corpus]),
             timestamps=np.stack([a.window.timestamps for a in corpus]),
             origin_index=np.array([a.window.origin_index for a in corpus]))
    with path.with_suffix(".provenance.jsonl").open("w") as fh:
        for a in corpus:
            rec = {"provenance": a.provenance, "anchor_index": a.anchor_index,
                   "latent_seed": a.latent_seed, "record": a.record}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return npz


def load_corpus(path: str | Path) -> list[AugmentedWindow]:
    path = Path(path)
    data = np.load(path.with_suffix(".npz"))
    records = [json.loads(line) for line in path.with_suffix(".provenance.jsonl").read_text().splitlines()]
    out = []
    for i, rec in enumerate(records):
        w = Window(data["lookback"][i], data["horizon"][i], data["timestamps"][i], int(data["origin_index"][i]))
        out.append(AugmentedWindow(w, rec["anchor_index"], rec["latent_seed"], w.timestamps,
                                   rec["provenance"], rec.get("record", {})))
    return out
