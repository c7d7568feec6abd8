#!/usr/bin/env python3
# K-fold model zoo, variance ranking, and the Group A / Group B comparison.

import numpy as np

from reaugment.dataset import SplitSpec, make_splits, windows
from reaugment.forecaster import TrainConfig, build_model_zoo
from reaugment.ranking import group_ab_experiment, rank_and_split, zoo_variances
from reaugment.synthetic import noisy_regime

# a clean sinusoid with heavy noise in the first 400 steps
ds = make_splits(noisy_regime(T=2000, seed=0, regime=(0, 400)), SplitSpec(), (1200, 300, 500))
train = windows(ds, "train", 48, 24)
val = windows(ds, "val", 48, 24)

cfg = TrainConfig(epochs=20, patience=3)
zoo = build_model_zoo(train, K=4, seed=0, val_windows=val, config=cfg)
print("zoo of", zoo.K, "members; fold sizes", np.bincount(zoo.fold_of_window))

records = zoo_variances(train, zoo)
anchors, rest = rank_and_split(records, 0.5)
var = np.array([r.variance for r in records])
print("variance: top half mean %.4f, bottom half mean %.4f" % (var[list(anchors.indices)].mean(), var[rest].mean()))

# anchors pile up where the noise was injected
origins = np.array([train[i].origin_index for i in anchors.indices])
print("share of anchors starting inside the noisy block:", np.mean(origins < 400).round(3))

a, b = group_ab_experiment(ds, zoo, seed=0, horizon=24, config=cfg)
print("Group A (high variance) test MAE %.4f" % a.mae)
print("Group B (low variance)  test MAE %.4f" % b.mae)
