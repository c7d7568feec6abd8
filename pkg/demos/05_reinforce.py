#!/usr/bin/env python3
# Score-function gradients on a 1-D Gaussian bandit, then Stage B on a toy zoo.

import numpy as np

from reaugment.forecaster import ForecasterParams, ModelZoo, contiguous_folds
from reaugment.numeric import DiagonalGaussian, LayerParams
from reaugment.reinforce import ReinforceConfig, policy_gradient_estimate, run_stage_b
from reaugment.vmae import VmaeConfig, init_policy

rng = np.random.default_rng(0)

# reward is a Gaussian bump at c; E[r] has a closed form
c, s, mu, sigma = 1.0, 0.7, 0.2, 0.8
v = s * s + sigma * sigma
exact_mu = -(mu - c) / v * s / np.sqrt(v) * np.exp(-(mu - c) ** 2 / (2 * v))

n = 100_000
z = mu + sigma * rng.standard_normal((n, 1))
r = np.exp(-(z[:, 0] - c) ** 2 / (2 * s * s))
g_mu, g_ls = policy_gradient_estimate(DiagonalGaussian(np.full((n, 1), mu), np.full((n, 1), np.log(sigma))), z, r)
print("d E[r] / d mu: Monte Carlo %.4f  exact %.4f" % (g_mu[0], exact_mu))

# toy zoo: member k forecasts k/2 * mean(lookback); it disagrees more on larger windows
members = [ForecasterParams("linear", [LayerParams(np.full((4, 4), k / 8), np.zeros(4))], 4, 4) for k in range(4)]
zoo = ModelZoo(members, contiguous_folds(8, 4))

# decoder writes z_0 to every step, so the prior alone sets the window level
policy = init_policy(VmaeConfig(window_len=8, channels=1, d_z=2, hidden=4, feature_dim=2))
W = np.zeros((4, 8))
W[2] = 1.0
policy.decoder = [LayerParams(W, np.zeros(8))]

anchors = (np.zeros((8, 8, 1)), np.tile(np.linspace(0, 1, 8), (8, 1)))
tuned, trace = run_stage_b(policy, anchors, zoo, ReinforceConfig(alpha=0.05, eta=1.0, steps=200, batch=8))
rw = [row["mean_reward"] for row in trace]
print("mean reward, first 20 steps %.3f, last 20 steps %.3f" % (np.mean(rw[:20]), np.mean(rw[-20:])))
