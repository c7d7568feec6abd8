import numpy as np
import pytest

from conftest import assert_grads_close, finite_difference
from reaugment.errors import DimensionError
from reaugment.numeric import DiagonalGaussian, LayerParams, count_parameters, parameters
from reaugment.vmae import (
    STACKS,
    MaskedWindow,
    VmaeConfig,
    apply_mask,
    init_policy,
    reconstruct,
    train_vmae,
    vmae_forward,
    vmae_loss,
    vmae_loss_and_grads,
)

TINY = VmaeConfig(window_len=8, channels=1, d_z=2, hidden=2, feature_dim=2)


def _sinusoids(n, L=16, C=1, seed=0):
    rng = np.random.default_rng(seed)
    t = np.arange(L)
    phase = rng.uniform(0, 2 * np.pi, (n, 1, C))
    values = np.sin(2 * np.pi * t[None, :, None] / 8 + phase)
    ts = np.tile(t / (L - 1), (n, 1))
    return values, ts


def test_mask_rate_extremes(rng):
    v = rng.standard_normal((192, 2))
    none = apply_mask(v, 0.0, rng)
    assert not none.mask.any()
    np.testing.assert_array_equal(none.values, v)
    full = apply_mask(v, 1.0, rng)
    assert full.mask.all() and np.all(full.values == 0)


def test_mask_count_is_binomial(rng):
    counts = apply_mask(np.ones((10_000, 192, 1)), 0.3, rng).mask.sum(axis=1)
    sigma_of_mean = np.sqrt(192 * 0.3 * 0.7 / 10_000)
    assert abs(counts.mean() - 57.6) < 3 * sigma_of_mean


def test_stack_widths():
    p = init_policy(VmaeConfig(window_len=192, channels=3, d_z=16, hidden=128, feature_dim=128))
    w = p.manifest()["widths"]
    assert w["prior"] == [192 * 5, 128, 32]
    assert w["posterior"] == [192 * 4, 128, 32]
    assert w["encoder"] == [192 * 5, 128, 128]
    assert w["decoder"] == [128 + 16, 128, 192 * 3]


def test_loss_arithmetic():
    s = np.zeros((1, 1, 1))
    s_hat = np.full((1, 1, 1), 0.2)
    prior = DiagonalGaussian(np.zeros((1, 1)), np.zeros((1, 1)))
    post = DiagonalGaussian(np.ones((1, 1)), np.zeros((1, 1)))
    out = vmae_loss(s_hat, s, prior, post, beta=0.1)
    assert out.reconstruction == pytest.approx(0.04)
    assert out.kl == pytest.approx(0.5)
    assert out.total == pytest.approx(0.09)
    zero = vmae_loss(s, s, prior, prior, beta=0.1)
    assert zero.total == 0.0


def test_every_stack_matches_finite_differences(rng):
    policy = init_policy(TINY, seed=1)
    for name in STACKS:
        assert count_parameters(policy.stack(name)) <= 64
    values = rng.standard_normal((3, 8, 1))
    ts = np.tile(np.linspace(0, 1, 8), (3, 1))
    masked = apply_mask(values, 0.3, rng, ts)
    noise = rng.standard_normal((3, 2))
    _, grads = vmae_loss_and_grads(policy, masked, values, ts, noise, beta=0.5)

    def loss():
        return vmae_loss_and_grads(policy, masked, values, ts, noise, beta=0.5)[0].total

    for name in STACKS:
        num = finite_difference(loss, parameters(policy.stack(name)))
        assert_grads_close(grads[name], num)


def test_forward_shape_and_zero_noise_determinism(rng):
    cfg = VmaeConfig(window_len=192, channels=2, d_z=4, hidden=8, feature_dim=8)
    policy = init_policy(cfg)
    v = rng.standard_normal((192, 2))
    ts = np.linspace(0, 1, 192)
    m = apply_mask(v, 0.3, rng, ts)
    a, *_ = vmae_forward(policy, m, v, ts, np.zeros(4))
    b, *_ = vmae_forward(policy, m, v, ts, np.zeros(4))
    assert a.shape == (1, 192, 2) and np.all(np.isfinite(a))
    np.testing.assert_array_equal(a, b)


def test_passthrough_decoder_returns_encoder_output():
    cfg = VmaeConfig(window_len=4, channels=1, d_z=2, hidden=4, feature_dim=4)
    policy = init_policy(cfg)
    policy.decoder = [LayerParams(np.vstack([np.eye(4), np.zeros((2, 4))]), np.zeros(4))]
    v = np.arange(4.0)[:, None]
    m = apply_mask(v, 0.0, np.random.default_rng(0), np.linspace(0, 1, 4))
    from reaugment.vmae import encode
    u, *_ = encode(policy, m)
    out = reconstruct(policy, m, rng=np.random.default_rng(5))
    np.testing.assert_allclose(out[:, 0], u[0])


def test_prior_path_never_reads_posterior(rng):
    policy = init_policy(TINY)
    v = rng.standard_normal((8, 1))
    m = apply_mask(v, 0.3, rng, np.linspace(0, 1, 8))
    before = reconstruct(policy, m, noise=np.ones(2))
    for layer in policy.posterior:
        layer.weights[:] = np.nan
        layer.bias[:] = np.nan
    np.testing.assert_array_equal(reconstruct(policy, m, noise=np.ones(2)), before)


def test_masked_values_do_not_leak(rng):
    policy = init_policy(TINY)
    v = rng.standard_normal((8, 1))
    mask = np.zeros(8, dtype=bool)
    mask[[1, 4]] = True
    ts = np.linspace(0, 1, 8)
    a = MaskedWindow(np.where(mask[:, None], 0.0, v), mask, ts)
    tampered = v.copy()
    tampered[mask] = 99.0
    b = MaskedWindow(tampered, mask, ts)
    np.testing.assert_array_equal(reconstruct(policy, a), reconstruct(policy, b))


def test_same_seed_same_sample(rng):
    policy = init_policy(TINY)
    m = apply_mask(rng.standard_normal((8, 1)), 0.3, rng, np.linspace(0, 1, 8))
    a = reconstruct(policy, m, rng=np.random.default_rng(3))
    b = reconstruct(policy, m, rng=np.random.default_rng(3))
    np.testing.assert_array_equal(a, b)


def test_wrong_window_shape():
    with pytest.raises(DimensionError):
        reconstruct(init_policy(TINY), MaskedWindow(np.zeros((9, 1)), np.zeros(9, bool), np.zeros(9)))


def test_zero_epochs_returns_initialization():
    values, ts = _sinusoids(4)
    cfg = VmaeConfig(window_len=16, channels=1, d_z=2, hidden=8, feature_dim=8, epochs=0)
    policy, _ = train_vmae((values, ts), cfg, seed=2)
    ref = init_policy(cfg, seed=2)
    for name in STACKS:
        for a, b in zip(parameters(policy.stack(name)), parameters(ref.stack(name))):
            np.testing.assert_array_equal(a, b)


def test_memorizes_a_single_window():
    values, ts = _sinusoids(1)
    values = np.repeat(values, 8, axis=0)
    ts = np.repeat(ts, 8, axis=0)
    cfg = VmaeConfig(window_len=16, channels=1, d_z=2, hidden=32, feature_dim=16, mask_rate=0.3,
                     beta=0.01, epochs=600, patience=600, batch_size=8, learning_rate=3e-3)
    policy, _ = train_vmae((values, ts), cfg, seed=0)
    m = apply_mask(values[0], 0.3, np.random.default_rng(9), ts[0])
    out = reconstruct(policy, m)
    assert np.mean((out - values[0]) ** 2) < 1e-3


def test_trained_reconstruction_beats_zero_imputation():
    values, ts = _sinusoids(200, seed=1)
    cfg = VmaeConfig(window_len=16, channels=1, d_z=4, hidden=32, feature_dim=16, epochs=60, patience=10)
    policy, history = train_vmae((values, ts), cfg, seed=0)
    test_v, test_ts = _sinusoids(50, seed=2)
    m = apply_mask(test_v, 0.3, np.random.default_rng(4), test_ts)
    ours = np.mean((reconstruct(policy, m) - test_v) ** 2)
    zeros = np.mean((m.values - test_v) ** 2)
    assert ours < zeros
    # loss curve trends down: late moving average below early one
    tr = np.convolve(history.train, np.ones(5) / 5, mode="valid")
    assert tr[-1] < tr[0]
