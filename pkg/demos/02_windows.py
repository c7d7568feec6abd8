#!/usr/bin/env python3
# Splits and sliding windows, including the few-shot prefix.

import numpy as np

from reaugment.dataset import BENCHMARK_PARTITIONS, SplitSpec, denormalize, make_splits, windows
from reaugment.synthetic import multi_sinusoid

raw = multi_sinusoid(T=5000, C=3, seed=0)
print("series", raw.values.shape, "timestamps", raw.timestamps[:3], "...")

full = make_splits(raw, SplitSpec("standard"), (3500, 500, 1000))
few = make_splits(raw, SplitSpec("fewshot", 0.1), (3500, 500, 1000))
print("standard bounds", full.bounds)
print("few-shot bounds", few.bounds)   # train is the first 350 steps; val/test unchanged

tr = windows(few, "train", 96, 96)
print(len(tr), "few-shot train windows =", 350 - 192 + 1)
w = tr[0]
print("window", w.lookback.shape, "->", w.horizon.shape, "origin", w.origin_index)

# normalization uses the few-shot train range only
print("train mean after normalizing", few.split_values("train").mean(axis=0).round(12))
back = denormalize(few, few.split_values("train"))
print("round trip max error", np.abs(back - raw.values[:350]).max())

# benchmark partitions
spec, std = SplitSpec.benchmark("ETTh1", "fewshot")
print("ETTh1 few-shot fraction", round(spec.fewshot_fraction, 4), "of", std)
print({k: v["fewshot"] for k, v in BENCHMARK_PARTITIONS.items()})
