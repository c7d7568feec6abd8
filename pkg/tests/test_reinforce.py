import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import kendalltau

from envs import bump_expected_reward, constant_decoder_policy, scaled_mean_zoo
from reaugment.checkpoint import policy_hash
from reaugment.errors import ConfigError
from reaugment.numeric import DiagonalGaussian
from reaugment.ranking import model_zoo_variance
from reaugment.dataset import Window
from reaugment.reinforce import (
    ReinforceConfig,
    compute_reward,
    compute_rewards,
    generated_zoo_variance,
    policy_gradient_estimate,
    reinforce_step,
    run_stage_b,
    scaled_sigmoid,
    write_trace_csv,
)
from reaugment.vmae import STACKS

ZERO_ANCHORS = (np.zeros((8, 8, 1)), np.tile(np.linspace(0, 1, 8), (8, 1)))


def test_sigmoid_values():
    assert scaled_sigmoid(0.0, 0.01) == 0.5
    assert scaled_sigmoid(200.0, 0.01) == pytest.approx(1 / (1 + np.exp(-2)), abs=1e-12)
    assert float(scaled_sigmoid(200.0, 0.01)) == pytest.approx(0.8808, abs=1e-4)


def test_reward_uses_variance_over_deviation():
    s = np.zeros((4, 1))
    s_hat = np.array([[1.0], [0.0], [1.0], [0.0]])
    rec = compute_reward(s_hat, s, None, eta=0.5, variance_fn=lambda x: np.array([3.0]))
    assert rec.recon_deviation == 2.0 and rec.f_value == 1.5
    assert rec.reward == pytest.approx(1 / (1 + np.exp(-0.75)), abs=1e-12)


def test_identical_window_is_floored():
    s = np.ones((4, 1))
    rec = compute_reward(s, s, None, eta=0.01, variance_fn=lambda x: np.array([1e-9]))
    assert np.isfinite(rec.f_value) and 0 < rec.reward < 1
    assert rec.f_value == pytest.approx(1e-9 / 1e-8)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1e4), st.floats(1e-6, 1e4), st.floats(1e-4, 1.0))
def test_reward_in_open_unit_interval_and_matches_logistic(var, dev, eta):
    s = np.zeros((1, 1))
    s_hat = np.full((1, 1), np.sqrt(dev))
    rec = compute_reward(s_hat, s, None, eta=eta, variance_fn=lambda x: np.array([var]))
    f = var / s_hat[0, 0] ** 2
    assert 0.0 < rec.reward < 1.0 or eta * f > 36
    assert rec.reward == pytest.approx(1 / (1 + np.exp(-eta * f)), abs=1e-12)


def test_generated_variance_matches_zoo_variance():
    zoo = scaled_mean_zoo()
    s_hat = np.random.default_rng(0).standard_normal((5, 8, 1))
    got = generated_zoo_variance(s_hat, zoo)
    for i in range(5):
        w = Window(s_hat[i, :4], s_hat[i, 4:], np.zeros(8), -1)
        assert got[i] == pytest.approx(model_zoo_variance(w, zoo).variance, rel=1e-12)


def test_shape_mismatch():
    with pytest.raises(ConfigError):
        compute_rewards(np.zeros((1, 4, 1)), np.zeros((1, 5, 1)), None, variance_fn=lambda x: np.zeros(1))


def test_bandit_gradient_matches_closed_form():
    mu, ls, c, s = 0.2, np.log(0.8), 1.0, 0.7
    rng = np.random.default_rng(0)
    z = mu + np.exp(ls) * rng.standard_normal((100_000, 1))
    r = np.exp(-(z[:, 0] - c) ** 2 / (2 * s * s))
    dist = DiagonalGaussian(np.full((100_000, 1), mu), np.full((100_000, 1), ls))
    g_mu, g_ls = policy_gradient_estimate(dist, z, r)
    _, e_mu, e_ls = bump_expected_reward(mu, np.exp(ls), c, s)
    assert g_mu[0] == pytest.approx(e_mu, rel=0.05)
    assert g_ls[0] == pytest.approx(e_ls, rel=0.05)


def test_zero_reward_leaves_prior_unchanged():
    policy = constant_decoder_policy()
    before = policy_hash(policy)
    reinforce_step(policy, *ZERO_ANCHORS, None, ReinforceConfig(alpha=1.0), np.random.default_rng(0),
                   reward_fn=lambda s_hat, s: np.zeros(len(s)))
    assert policy_hash(policy) == before


def test_zero_steps_returns_equal_policy():
    policy = constant_decoder_policy()
    new, trace = run_stage_b(policy, ZERO_ANCHORS, scaled_mean_zoo(), ReinforceConfig(steps=0))
    assert trace == [] and policy_hash(new) == policy_hash(policy)


def test_only_prior_moves_and_input_is_not_mutated():
    policy = constant_decoder_policy()
    before = {name: policy_hash(policy, (name,)) for name in STACKS}
    new, _ = run_stage_b(policy, ZERO_ANCHORS, scaled_mean_zoo(), ReinforceConfig(alpha=0.05, eta=1.0, steps=5, batch=4))
    assert {name: policy_hash(policy, (name,)) for name in STACKS} == before
    after = {name: policy_hash(new, (name,)) for name in STACKS}
    assert after["prior"] != before["prior"]
    for name in ("posterior", "encoder", "decoder"):
        assert after[name] == before[name]


def test_reward_trace_rises_in_constructed_environment(tmp_path):
    cfg = ReinforceConfig(alpha=0.05, eta=1.0, steps=200, batch=8)
    _, trace = run_stage_b(constant_decoder_policy(), ZERO_ANCHORS, scaled_mean_zoo(), cfg, seed=0)
    rewards = [row["mean_reward"] for row in trace]
    tau, p = kendalltau(np.arange(len(rewards)), rewards)
    assert tau > 0 and p < 0.01
    assert np.mean(rewards[-20:]) > np.mean(rewards[:20])
    write_trace_csv(tmp_path / "trace.csv", trace)
    assert (tmp_path / "trace.csv").read_text().splitlines()[0] == "step,mean_reward,mean_f,mean_deviation,mean_variance"


def test_stage_b_is_deterministic():
    cfg = ReinforceConfig(alpha=0.05, eta=1.0, steps=10, batch=4)
    a, ta = run_stage_b(constant_decoder_policy(), ZERO_ANCHORS, scaled_mean_zoo(), cfg, seed=3)
    b, tb = run_stage_b(constant_decoder_policy(), ZERO_ANCHORS, scaled_mean_zoo(), cfg, seed=3)
    assert policy_hash(a) == policy_hash(b) and ta == tb


def test_config_validation():
    with pytest.raises(ConfigError):
        ReinforceConfig(alpha=0)
    with pytest.raises(ConfigError):
        ReinforceConfig(steps=-1)
