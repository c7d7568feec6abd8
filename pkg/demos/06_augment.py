#!/usr/bin/env python3
# Corpus plan, generation with provenance, and the two classical baselines.

import numpy as np

from reaugment.augment import (assemble_corpus, convolve_baseline, gaussian_baseline, generate,
                               generate_one, make_plan)
from reaugment.dataset import Window
from reaugment.vmae import VmaeConfig, init_policy

rng = np.random.default_rng(0)
originals = [Window(rng.standard_normal((12, 2)), rng.standard_normal((12, 2)), (i + np.arange(24)) / 1000, i)
             for i in range(100)]

plan = make_plan(n_original=100, n_anchors=50, factor=3)
print(plan, "-> generated", plan.n_generated)

policy = init_policy(VmaeConfig(window_len=24, channels=2, d_z=4, hidden=16, feature_dim=8))
anchor_idx = list(range(0, 100, 2))
gen = generate(policy, [originals[i] for i in anchor_idx], anchor_idx, plan, test_range=(0.8, 1.0), seed=7)
corpus = assemble_corpus(originals, gen, seed=7)
print("corpus size", len(corpus), " provenance counts",
      {p: sum(a.provenance == p for a in corpus) for p in ("original", "reaugment")})

# any sample can be rebuilt from its record alone
a = gen[37]
print("record", a.record)
again = generate_one(policy, originals[a.anchor_index], a.record, (0.8, 1.0))
print("bit-identical:", again.window.values.tobytes() == a.window.values.tobytes())
print("shifted timestamps start at %.4f" % a.window.timestamps[0])

noisy = gaussian_baseline(originals[:1], 0.1, rng)[0]
smooth = convolve_baseline(originals[:1])[0]
print("gaussian baseline mean abs change %.4f" % np.abs(noisy.window.values - originals[0].values).mean())
print("convolve baseline mean abs change %.4f" % np.abs(smooth.window.values - originals[0].values).mean())
