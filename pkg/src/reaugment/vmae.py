"""Variational masked autoencoder used as the augmentation policy.

Four MLP stacks:

* prior      (masked window + timestamps + mask bits) -> Gaussian over z
* posterior  (full window + timestamps)               -> Gaussian over z
* encoder    (masked window + timestamps + mask bits) -> feature vector u
* decoder    concat(u, z)                             -> reconstructed window

Each time step is represented by its C channel values followed by its
timestamp and its mask bit (masked steps carry zeros); the steps are then
flattened into a single input vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import Window, stack_full
from .errors import ConfigError, DimensionError, NumericalError
from .numeric import (
    Adam,
    DiagonalGaussian,
    LayerParams,
    copy_layers,
    gaussian_sample,
    gradient_arrays,
    init_mlp,
    kl_diag_gaussians,
    kl_diag_gaussians_grad,
    mlp_backward,
    mlp_forward,
    parameters,
)

log = logging.getLogger(__name__)

STACKS = ("prior", "posterior", "encoder", "decoder")


@dataclass
class VmaeConfig:
    window_len: int = 192
    channels: int = 1
    d_z: int = 16
    hidden: int = 128
    feature_dim: int = 128
    mask_rate: float = 0.3
    beta: float = 0.1
    epochs: int = 100
    patience: int = 5
    batch_size: int = 32
    learning_rate: float = 1e-3
    holdout_fraction: float = 0.1


@dataclass
class MaskedWindow:
    values: np.ndarray     # [..., L, C], zero at masked steps
    mask: np.ndarray       # [..., L], True = masked
    timestamps: np.ndarray  # [..., L]


@dataclass
class VmaePolicy:
    prior: list[LayerParams]
    posterior: list[LayerParams]
    encoder: list[LayerParams]
    decoder: list[LayerParams]
    window_len: int
    channels: int
    d_z: int
    mask_rate: float = 0.3

    def stack(self, name: str) -> list[LayerParams]:
        return getattr(self, name)

    def copy(self) -> "VmaePolicy":
        return VmaePolicy(copy_layers(self.prior), copy_layers(self.posterior),
                          copy_layers(self.encoder), copy_layers(self.decoder),
                          self.window_len, self.channels, self.d_z, self.mask_rate)

    def manifest(self) -> dict:
        return {
            "window_len": self.window_len, "channels": self.channels, "d_z": self.d_z,
            "mask_rate": self.mask_rate,
            "widths": {name: [self.stack(name)[0].n_in] + [l.n_out for l in self.stack(name)]
                       for name in STACKS},
        }


@dataclass
class VmaeLossBreakdown:
    reconstruction: float
    kl: float
    total: float
    beta: float


@dataclass
class VmaeCache:
    enc: object
    prior: object
    post: object
    dec: object
    prior_dist: DiagonalGaussian
    post_dist: DiagonalGaussian
    noise: np.ndarray
    feature_dim: int


def init_policy(config: VmaeConfig, seed: int = 0) -> VmaePolicy:
    rng = np.random.default_rng(seed)
    L, C, H = config.window_len, config.channels, config.hidden
    masked_in = L * (C + 2)
    full_in = L * (C + 1)
    prior = init_mlp(rng, [masked_in, H, 2 * config.d_z])
    posterior = init_mlp(rng, [full_in, H, 2 * config.d_z])
    encoder = init_mlp(rng, [masked_in, H, config.feature_dim], out_activation="tanh")
    decoder = init_mlp(rng, [config.feature_dim + config.d_z, H, L * C])
    # start latent heads near the standard normal so the initial KL is small
    for net in (prior, posterior):
        net[-1].weights *= 0.1
    return VmaePolicy(prior, posterior, encoder, decoder, L, C, config.d_z, config.mask_rate)


def apply_mask(values: np.ndarray, mask_rate: float, rng: np.random.Generator,
               timestamps: np.ndarray | None = None) -> MaskedWindow:
    """Mask whole time steps independently with probability ``mask_rate``."""
    if not 0.0 <= mask_rate <= 1.0:
        raise ConfigError(f"mask_rate must be in [0, 1], got {mask_rate}")
    values = np.asarray(values, dtype=np.float64)
    mask = rng.random(values.shape[:-1]) < mask_rate
    masked = np.where(mask[..., None], 0.0, values)
    if timestamps is None:
        timestamps = np.zeros(values.shape[:-1])
    return MaskedWindow(masked, mask, np.asarray(timestamps, dtype=np.float64))


def masked_features(masked: MaskedWindow) -> np.ndarray:
    """``[B, L * (C + 2)]`` encoder/prior input."""
    v = masked.values if masked.values.ndim == 3 else masked.values[None]
    m = np.atleast_2d(masked.mask).astype(np.float64)
    t = np.atleast_2d(masked.timestamps)
    x = np.concatenate([np.where(m[..., None] > 0, 0.0, v), t[..., None], m[..., None]], axis=-1)
    return x.reshape(x.shape[0], -1)


def full_features(values: np.ndarray, timestamps: np.ndarray) -> np.ndarray:
    """``[B, L * (C + 1)]`` posterior input."""
    v = values if values.ndim == 3 else values[None]
    t = np.atleast_2d(timestamps)
    x = np.concatenate([v, t[..., None]], axis=-1)
    return x.reshape(x.shape[0], -1)


def _check_shapes(policy: VmaePolicy, values: np.ndarray) -> None:
    if values.shape[-2:] != (policy.window_len, policy.channels):
        raise DimensionError(
            f"window shape {values.shape[-2:]} != policy shape {(policy.window_len, policy.channels)}"
        )


def encode(policy: VmaePolicy, masked: MaskedWindow):
    """Encoder features ``u`` and prior distribution for a masked batch."""
    _check_shapes(policy, masked.values)
    xm = masked_features(masked)
    u, enc_cache = mlp_forward(policy.encoder, xm)
    prior_out, prior_cache = mlp_forward(policy.prior, xm)
    return u, DiagonalGaussian.from_head(prior_out), enc_cache, prior_cache


def decode(policy: VmaePolicy, u: np.ndarray, z: np.ndarray):
    out, cache = mlp_forward(policy.decoder, np.concatenate([u, z], axis=1))
    return out.reshape(-1, policy.window_len, policy.channels), cache


def vmae_forward(policy: VmaePolicy, masked: MaskedWindow, original: np.ndarray,
                 timestamps: np.ndarray, noise: np.ndarray):
    """Training-mode pass decoding a posterior sample.

    Returns ``(s_hat [B, L, C], prior, posterior, cache)``.
    """
    original = np.asarray(original, dtype=np.float64)
    if original.ndim == 2:
        original = original[None]
    _check_shapes(policy, original)
    u, prior, enc_cache, prior_cache = encode(policy, masked)
    post_out, post_cache = mlp_forward(policy.posterior, full_features(original, timestamps))
    post = DiagonalGaussian.from_head(post_out)
    noise = np.asarray(noise, dtype=np.float64).reshape(post.mean.shape)
    z = gaussian_sample(post, noise)
    s_hat, dec_cache = decode(policy, u, z)
    cache = VmaeCache(enc_cache, prior_cache, post_cache, dec_cache, prior, post, noise, u.shape[1])
    return s_hat, prior, post, cache


def vmae_loss(s_hat: np.ndarray, original: np.ndarray, prior: DiagonalGaussian,
              posterior: DiagonalGaussian, beta: float = 0.1) -> VmaeLossBreakdown:
    """Batch-mean of (mean squared reconstruction error + beta * KL(posterior || prior))."""
    s_hat = np.asarray(s_hat, dtype=np.float64)
    original = np.asarray(original, dtype=np.float64).reshape(s_hat.shape)
    d = s_hat - original
    recon = float(np.mean(d * d))
    kl = float(np.mean(kl_diag_gaussians(posterior, prior)))
    return VmaeLossBreakdown(recon, kl, recon + beta * kl, beta)


def vmae_loss_and_grads(policy: VmaePolicy, masked: MaskedWindow, original: np.ndarray,
                        timestamps: np.ndarray, noise: np.ndarray, beta: float = 0.1):
    """Loss breakdown and gradients ``{stack name: [dW0, db0, ...]}``."""
    original = np.asarray(original, dtype=np.float64)
    if original.ndim == 2:
        original = original[None]
    s_hat, prior, post, cache = vmae_forward(policy, masked, original, timestamps, noise)
    loss = vmae_loss(s_hat, original, prior, post, beta)
    B = s_hat.shape[0]

    d_out = (2.0 * (s_hat - original) / s_hat.size).reshape(B, -1)
    dec_g, d_in = mlp_backward(cache.dec, d_out)
    du, dz = d_in[:, :cache.feature_dim], d_in[:, cache.feature_dim:]

    d_qm, d_qls, d_pm, d_pls = kl_diag_gaussians_grad(post, prior)
    w = beta / B
    d_post_mean = dz + w * d_qm
    d_post_ls = dz * post.std * cache.noise * post._clip_mask() + w * d_qls
    post_g, _ = mlp_backward(cache.post, np.concatenate([d_post_mean, d_post_ls], axis=1))
    prior_g, _ = mlp_backward(cache.prior, np.concatenate([w * d_pm, w * d_pls], axis=1))
    enc_g, _ = mlp_backward(cache.enc, du)
    grads = {
        "prior": gradient_arrays(prior_g),
        "posterior": gradient_arrays(post_g),
        "encoder": gradient_arrays(enc_g),
        "decoder": gradient_arrays(dec_g),
    }
    return loss, grads


def reconstruct(policy: VmaePolicy, masked: MaskedWindow, noise: np.ndarray | None = None,
                rng: np.random.Generator | None = None, use_prior: bool = True,
                original: np.ndarray | None = None) -> np.ndarray:
    """Generation-mode decode. The prior path never touches the posterior network.

    Latent noise comes from ``noise`` if given, else from ``rng``, else zero.
    """
    u, prior, _, _ = encode(policy, masked)
    if use_prior:
        dist = prior
    else:
        if original is None:
            raise ConfigError("posterior reconstruction needs the original window")
        post_out, _ = mlp_forward(policy.posterior, full_features(np.asarray(original), masked.timestamps))
        dist = DiagonalGaussian.from_head(post_out)
    if noise is None:
        noise = rng.standard_normal(dist.mean.shape) if rng is not None else np.zeros(dist.mean.shape)
    z = gaussian_sample(dist, np.asarray(noise, dtype=np.float64).reshape(dist.mean.shape))
    s_hat, _ = decode(policy, u, z)
    return s_hat if np.ndim(masked.values) == 3 else s_hat[0]


def policy_parameters(policy: VmaePolicy, stacks: Sequence[str] = STACKS) -> list[np.ndarray]:
    out = []
    for name in stacks:
        out.extend(parameters(policy.stack(name)))
    return out


def _as_arrays(anchor_windows) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(anchor_windows, tuple):
        values, ts = anchor_windows
        return np.asarray(values, dtype=np.float64), np.asarray(ts, dtype=np.float64)
    return stack_full(anchor_windows)


@dataclass
class VmaeHistory:
    train: list[float] = field(default_factory=list)
    holdout: list[float] = field(default_factory=list)
    best_epoch: int = -1


def train_vmae(anchor_windows: Sequence[Window] | tuple[np.ndarray, np.ndarray],
               config: VmaeConfig | None = None, seed: int = 0,
               init: VmaePolicy | None = None) -> tuple[VmaePolicy, VmaeHistory]:
    """Jointly fit all four stacks on the anchor windows with Adam.

    A held-out slice of the anchors (if there are at least ten) drives early
    stopping; its masks and latent noise are fixed so the score is comparable
    across epochs.
    """
    values, ts = _as_arrays(anchor_windows)
    if values.shape[0] == 0:
        raise ConfigError("train_vmae needs at least one anchor window")
    cfg = config or VmaeConfig(window_len=values.shape[1], channels=values.shape[2])
    if (cfg.window_len, cfg.channels) != values.shape[1:]:
        raise DimensionError(f"config window {(cfg.window_len, cfg.channels)} != data {values.shape[1:]}")
    policy = init.copy() if init is not None else init_policy(cfg, seed)
    history = VmaeHistory()
    if cfg.epochs <= 0:
        return policy, history

    rng = np.random.default_rng([seed, 2])
    n = values.shape[0]
    n_hold = int(n * cfg.holdout_fraction) if n >= 10 else 0
    perm = rng.permutation(n)
    hold_idx, fit_idx = perm[:n_hold], perm[n_hold:]
    hold = None
    if n_hold:
        hrng = np.random.default_rng([seed, 3])
        hm = apply_mask(values[hold_idx], cfg.mask_rate, hrng, ts[hold_idx])
        hold = (hm, values[hold_idx], ts[hold_idx], hrng.standard_normal((n_hold, cfg.d_z)))

    opt = Adam(learning_rate=cfg.learning_rate)
    theta = policy_parameters(policy)
    best, best_score, bad, last_finite = policy.copy(), np.inf, 0, None
    for epoch in range(cfg.epochs):
        order = fit_idx[rng.permutation(len(fit_idx))]
        total = 0.0
        for s in range(0, len(order), cfg.batch_size):
            idx = order[s:s + cfg.batch_size]
            masked = apply_mask(values[idx], cfg.mask_rate, rng, ts[idx])
            noise = rng.standard_normal((len(idx), cfg.d_z))
            loss, grads = vmae_loss_and_grads(policy, masked, values[idx], ts[idx], noise, cfg.beta)
            if not np.isfinite(loss.total):
                raise NumericalError(f"VMAE loss diverged at epoch {epoch}; last finite loss {last_finite}")
            last_finite = loss.total
            opt.step(theta, [g for name in STACKS for g in grads[name]])
            total += loss.total * len(idx)
        history.train.append(total / len(order))
        if hold is not None:
            s_hat, prior, post, _ = vmae_forward(policy, hold[0], hold[1], hold[2], hold[3])
            score = vmae_loss(s_hat, hold[1], prior, post, cfg.beta).total
            history.holdout.append(score)
        else:
            score = history.train[-1]
        if not np.isfinite(score):
            raise NumericalError(f"VMAE holdout loss diverged at epoch {epoch}; last finite loss {last_finite}")
        if score < best_score:
            best, best_score, bad, history.best_epoch = policy.copy(), score, 0, epoch
        else:
            bad += 1
            if bad >= cfg.patience:
                break
    log.debug("VMAE best score %.6g at epoch %d", best_score, history.best_epoch)
    return best, history
