"""Small constructed environments shared by the reinforce, pipeline and acceptance tests."""

import numpy as np

from reaugment.forecaster import ForecasterParams, ModelZoo, contiguous_folds
from reaugment.numeric import LayerParams
from reaugment.vmae import VmaeConfig, init_policy

L_LOOK, L_HOR = 4, 4
SCALES = (0.0, 0.5, 1.0, 2.0)


def bump_expected_reward(mu, sigma, c, s):
    """E[exp(-(z-c)^2 / (2 s^2))] for z ~ N(mu, sigma^2), and its gradient w.r.t. (mu, log sigma)."""
    v = s * s + sigma * sigma
    d = mu - c
    e = s / np.sqrt(v) * np.exp(-d * d / (2 * v))
    return e, -e * d / v, sigma * sigma * e * (d * d / (v * v) - 1.0 / v)


def scaled_mean_zoo():
    """Member k forecasts every horizon step as ``SCALES[k] * mean(lookback)``.

    On a constant window ``x`` the squared errors are ``h (1 - c_k)^2 x^2``, so
    zoo variance grows like ``x^4`` while the deviation from a zero anchor
    grows like ``x^2``: the reward rises monotonically with ``|x|``.
    """
    members = [ForecasterParams("linear", [LayerParams(np.full((L_LOOK, L_HOR), c / L_LOOK), np.zeros(L_HOR))],
                                L_LOOK, L_HOR) for c in SCALES]
    return ModelZoo(members, contiguous_folds(8, len(SCALES)))


def constant_decoder_policy(seed=0):
    """Tiny policy whose decoder emits ``z_0`` at every step, ignoring the encoder."""
    L = L_LOOK + L_HOR
    policy = init_policy(VmaeConfig(window_len=L, channels=1, d_z=2, hidden=4, feature_dim=2), seed)
    W = np.zeros((4, L))
    W[2, :] = 1.0
    policy.decoder = [LayerParams(W, np.zeros(L))]
    return policy
