"""Score-function fine-tuning of the VMAE prior against the model-zoo reward.

Only the prior stack is updated; the posterior, encoder and decoder are
treated as constants. The update is plain gradient ascent on
``mean_i r_i * grad log p(z_i)``, with no baseline unless requested.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

from .augment import shift_timestamps
from .dataset import Window, stack_full
from .errors import ConfigError, NumericalError
from .forecaster import ModelZoo
from .numeric import SGD, DiagonalGaussian, gaussian_log_prob, gaussian_sample, gradient_arrays, mlp_backward, parameters
from .ranking import member_errors, variance_of_errors
from .vmae import VmaePolicy, apply_mask, decode, encode

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("step", "mean_reward", "mean_f", "mean_deviation", "mean_variance")


@dataclass(frozen=True)
class RewardRecord:
    anchor_index: int
    f_value: float
    reward: float
    recon_deviation: float
    zoo_variance: float


@dataclass
class ReinforceConfig:
    alpha: float = 1e-3
    eta: float = 0.01
    steps: int = 500
    batch: int = 32
    deviation_floor: float = 1e-8
    baseline: bool = False
    baseline_decay: float = 0.9

    def __post_init__(self):
        if self.alpha <= 0 or self.eta <= 0 or self.deviation_floor <= 0:
            raise ConfigError("alpha, eta and deviation_floor must be positive")
        if self.steps < 0 or self.batch <= 0:
            raise ConfigError("steps must be >= 0 and batch > 0")


def scaled_sigmoid(f, eta: float):
    return expit(eta * np.asarray(f, dtype=np.float64))


def generated_zoo_variance(s_hat: np.ndarray, zoo: ModelZoo) -> np.ndarray:
    """Zoo variance of generated windows ``[B, L, C]`` scored on their horizon part."""
    l = zoo.lookback
    errs = member_errors(s_hat[:, :l], s_hat[:, l:], zoo, zoo.scoring_members(None))
    return variance_of_errors(errs)[1]


def compute_rewards(s_hat: np.ndarray, s: np.ndarray, zoo: ModelZoo | None, eta: float = 0.01,
                    deviation_floor: float = 1e-8, anchor_indices: Sequence[int] | None = None,
                    variance_fn: Callable[[np.ndarray], np.ndarray] | None = None) -> list[RewardRecord]:
    """Batch reward: ``sigmoid(eta * Var / max(||s_hat - s||^2, floor))``."""
    s_hat = np.asarray(s_hat, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if s_hat.shape != s.shape:
        raise ConfigError(f"generated shape {s_hat.shape} != original shape {s.shape}")
    var = variance_fn(s_hat) if variance_fn is not None else generated_zoo_variance(s_hat, zoo)
    var = np.asarray(var, dtype=np.float64).reshape(s_hat.shape[0])
    dev = np.sum((s_hat - s) ** 2, axis=(1, 2))
    f = var / np.maximum(dev, deviation_floor)
    r = scaled_sigmoid(f, eta)
    idx = anchor_indices if anchor_indices is not None else [-1] * len(f)
    return [RewardRecord(int(i), float(fi), float(ri), float(di), float(vi))
            for i, fi, ri, di, vi in zip(idx, f, r, dev, var)]


def compute_reward(s_hat: np.ndarray, s: np.ndarray, zoo: ModelZoo | None, eta: float = 0.01,
                   deviation_floor: float = 1e-8, anchor_index: int = -1,
                   variance_fn: Callable[[np.ndarray], np.ndarray] | None = None) -> RewardRecord:
    """Reward for a single generated window ``[L, C]``."""
    return compute_rewards(np.asarray(s_hat)[None], np.asarray(s)[None], zoo, eta, deviation_floor,
                           [anchor_index], variance_fn)[0]


def score_function_terms(dist: DiagonalGaussian, z: np.ndarray,
                         weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample ``w_i * grad log p(z_i)`` w.r.t. (mean, log_std), divided by the batch size."""
    _, d_mean, d_ls = gaussian_log_prob(dist, z)
    w = np.asarray(weights, dtype=np.float64).reshape(-1, 1) / z.shape[0]
    return w * d_mean, w * d_ls


def policy_gradient_estimate(dist: DiagonalGaussian, z: np.ndarray,
                             rewards: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo estimate of ``grad E[r]`` for a shared (unbatched) Gaussian policy."""
    d_mean, d_ls = score_function_terms(dist, z, rewards)
    return d_mean.sum(axis=0), d_ls.sum(axis=0)


@dataclass
class StepResult:
    records: list[RewardRecord]
    grad_norm: float


def reinforce_step(policy: VmaePolicy, anchor_values: np.ndarray, anchor_timestamps: np.ndarray,
                   zoo: ModelZoo | None, config: ReinforceConfig, rng: np.random.Generator,
                   test_range: tuple[float, float] | None = None,
                   anchor_indices: Sequence[int] | None = None, baseline: float = 0.0,
                   reward_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
                   optimizer: SGD | None = None) -> StepResult:
    """One ascent step on the prior stack (in place) from a batch of anchors.

    ``reward_fn(s_hat, s)`` replaces the zoo reward when given.
    """
    values = np.asarray(anchor_values, dtype=np.float64)
    ts = np.asarray(anchor_timestamps, dtype=np.float64)
    if test_range is not None:
        ts = shift_timestamps(ts, test_range, rng)
    masked = apply_mask(values, policy.mask_rate, rng, ts)
    u, prior, _, prior_cache = encode(policy, masked)
    z = gaussian_sample(prior, rng.standard_normal(prior.mean.shape))
    s_hat, _ = decode(policy, u, z)
    if reward_fn is None:
        records = compute_rewards(s_hat, values, zoo, config.eta, config.deviation_floor, anchor_indices)
        rewards = np.array([r.reward for r in records])
    else:
        rewards = np.asarray(reward_fn(s_hat, values), dtype=np.float64)
        dev = np.sum((s_hat - values) ** 2, axis=(1, 2))
        records = [RewardRecord(-1, float("nan"), float(r), float(d), float("nan"))
                   for r, d in zip(rewards, dev)]
    d_mean, d_ls = score_function_terms(prior, z, rewards - baseline)
    grads, _ = mlp_backward(prior_cache, np.concatenate([d_mean, d_ls], axis=1))
    flat = gradient_arrays(grads)
    if not all(np.all(np.isfinite(g)) for g in flat):
        raise NumericalError(
            f"non-finite policy gradient (rewards min={np.min(rewards)}, max={np.max(rewards)}, "
            f"|z| max={np.max(np.abs(z))})"
        )
    opt = optimizer or SGD(config.alpha)
    opt.step(parameters(policy.prior), flat, direction="ascent")
    return StepResult(records, float(np.sqrt(sum(np.sum(g * g) for g in flat))))


def run_stage_b(policy: VmaePolicy, anchor_windows: Sequence[Window] | tuple[np.ndarray, np.ndarray],
                zoo: ModelZoo | None, config: ReinforceConfig | None = None, seed: int = 0,
                test_range: tuple[float, float] | None = None,
                reward_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
                ) -> tuple[VmaePolicy, list[dict]]:
    """Run ``config.steps`` ascent steps over reshuffled anchor batches on a copy of ``policy``."""
    cfg = config or ReinforceConfig()
    if isinstance(anchor_windows, tuple):
        values, ts = (np.asarray(a, dtype=np.float64) for a in anchor_windows)
    else:
        values, ts = stack_full(anchor_windows)
    new = policy.copy()
    rng = np.random.default_rng([seed, 4])
    opt = SGD(cfg.alpha)
    n = values.shape[0]
    trace: list[dict] = []
    order, pos, baseline = rng.permutation(n), 0, 0.0
    for step in range(cfg.steps):
        if pos + min(cfg.batch, n) > n:
            order, pos = rng.permutation(n), 0
        idx = order[pos:pos + cfg.batch]
        pos += len(idx)
        res = reinforce_step(new, values[idx], ts[idx], zoo, cfg, rng, test_range,
                             [int(i) for i in idx], baseline if cfg.baseline else 0.0,
                             reward_fn, opt)
        rewards = np.array([r.reward for r in res.records])
        if cfg.baseline:
            baseline = cfg.baseline_decay * baseline + (1 - cfg.baseline_decay) * float(rewards.mean())
        trace.append({
            "step": step,
            "mean_reward": float(rewards.mean()),
            "mean_f": float(np.mean([r.f_value for r in res.records])),
            "mean_deviation": float(np.mean([r.recon_deviation for r in res.records])),
            "mean_variance": float(np.mean([r.zoo_variance for r in res.records])),
        })
    if trace:
        log.debug("stage B: mean reward %.6f -> %.6f", trace[0]["mean_reward"], trace[-1]["mean_reward"])
    return new, trace


def write_trace_csv(path: str | Path, trace: Sequence[dict]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for row in trace:
            w.writerow([row["step"]] + [repr(row[c]) for c in TRACE_COLUMNS[1:]])
