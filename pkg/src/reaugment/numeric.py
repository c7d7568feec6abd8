"""Dense layers with hand-written backward passes, optimizers and diagonal Gaussians.

Arrays are plain float64 ``numpy`` arrays. A network is a list of
:class:`LayerParams`; ``mlp_forward`` returns the output together with a cache
that ``mlp_backward`` consumes. Nothing here mutates its inputs except the
optimizers, which update parameter arrays in place.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, NumericalError, UsageError

ACTIVATIONS = ("identity", "relu", "tanh")

LOG_STD_MIN = float(np.log(1e-6))
LOG_STD_MAX = float(np.log(1e6))
LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class LayerParams:
    """Affine map ``x @ weights + bias`` followed by an activation."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str = "identity"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2:
            raise DimensionError(f"weights must be 2-D, got shape {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[1],):
            raise DimensionError(
                f"bias shape {self.bias.shape} does not match output width {self.weights.shape[1]}"
            )
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def n_in(self) -> int:
        return self.weights.shape[0]

    @property
    def n_out(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "LayerParams":
        return LayerParams(self.weights.copy(), self.bias.copy(), self.activation)


@dataclass
class LayerGrads:
    weights: np.ndarray
    bias: np.ndarray


@dataclass
class MlpCache:
    layers: list[LayerParams]
    inputs: list[np.ndarray]
    preacts: list[np.ndarray]


def init_layer(rng: np.random.Generator, n_in: int, n_out: int, activation: str = "identity",
               scale: float | None = None) -> LayerParams:
    """Uniform Glorot-style init; ``scale`` overrides the bound."""
    bound = np.sqrt(6.0 / (n_in + n_out)) if scale is None else scale
    w = rng.uniform(-bound, bound, size=(n_in, n_out))
    return LayerParams(w, np.zeros(n_out), activation)


def init_mlp(rng: np.random.Generator, widths: Sequence[int], hidden_activation: str = "tanh",
             out_activation: str = "identity") -> list[LayerParams]:
    layers = []
    for i, (a, b) in enumerate(zip(widths[:-1], widths[1:])):
        act = out_activation if i == len(widths) - 2 else hidden_activation
        layers.append(init_layer(rng, a, b, act))
    return layers


def _activate(x: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(x, 0.0)
    if activation == "tanh":
        return np.tanh(x)
    return x


def _activation_grad(pre: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return (pre > 0.0).astype(np.float64)
    if activation == "tanh":
        return 1.0 - np.tanh(pre) ** 2
    return np.ones_like(pre)


def mlp_forward(layers: Sequence[LayerParams], x: np.ndarray) -> tuple[np.ndarray, MlpCache]:
    """Run ``x`` (rows x features) through the stack; returns output and backward cache."""
    h = np.asarray(x, dtype=np.float64)
    if h.ndim != 2:
        raise DimensionError(f"input must be 2-D, got shape {h.shape}")
    inputs, preacts = [], []
    for i, layer in enumerate(layers):
        if h.shape[1] != layer.n_in:
            raise DimensionError(
                f"layer {i}: input width {h.shape[1]} != expected {layer.n_in}"
            )
        inputs.append(h)
        pre = h @ layer.weights + layer.bias
        preacts.append(pre)
        h = _activate(pre, layer.activation)
    return h, MlpCache(list(layers), inputs, preacts)


def mlp_backward(cache: MlpCache | None, upstream: np.ndarray) -> tuple[list[LayerGrads], np.ndarray]:
    """Gradients of ``sum(upstream * output)`` w.r.t. every layer and the input."""
    if cache is None:
        raise UsageError("mlp_backward called without a forward cache")
    g = np.asarray(upstream, dtype=np.float64)
    expected = cache.preacts[-1].shape if cache.preacts else cache.inputs[0].shape
    if g.shape != expected:
        raise DimensionError(f"upstream grad shape {g.shape} != forward output {expected}")
    grads: list[LayerGrads] = [None] * len(cache.layers)  # type: ignore[list-item]
    for i in range(len(cache.layers) - 1, -1, -1):
        layer = cache.layers[i]
        g = g * _activation_grad(cache.preacts[i], layer.activation)
        grads[i] = LayerGrads(cache.inputs[i].T @ g, g.sum(axis=0))
        g = g @ layer.weights.T
    return grads, g


def parameters(layers: Sequence[LayerParams]) -> list[np.ndarray]:
    """Flat list ``[W0, b0, W1, b1, ...]`` of references (not copies)."""
    out = []
    for layer in layers:
        out.extend((layer.weights, layer.bias))
    return out


def gradient_arrays(grads: Sequence[LayerGrads]) -> list[np.ndarray]:
    out = []
    for g in grads:
        out.extend((g.weights, g.bias))
    return out


def copy_layers(layers: Sequence[LayerParams]) -> list[LayerParams]:
    return [layer.copy() for layer in layers]


def count_parameters(layers: Sequence[LayerParams]) -> int:
    return sum(layer.weights.size + layer.bias.size for layer in layers)


# ---------------------------------------------------------------- optimizers

def _check_grads(params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> None:
    if len(params) != len(grads):
        raise DimensionError(f"{len(params)} parameter arrays but {len(grads)} gradients")
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise DimensionError(f"param {i}: shape {p.shape} != grad shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient in parameter array {i}")


def _sign(direction: str) -> float:
    if direction == "descent":
        return -1.0
    if direction == "ascent":
        return 1.0
    raise ValueError(f"direction must be 'descent' or 'ascent', got {direction!r}")


@dataclass
class SGD:
    """Plain gradient step ``p <- p -/+ lr * g``."""

    learning_rate: float = 1e-3
    steps: int = 0

    def step(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray],
             direction: str = "descent") -> Sequence[np.ndarray]:
        sign = _sign(direction)
        _check_grads(params, grads)
        for p, g in zip(params, grads):
            p += sign * self.learning_rate * g
        self.steps += 1
        return params


@dataclass
class Adam:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    steps: int = 0
    m: list[np.ndarray] = field(default_factory=list, repr=False)
    v: list[np.ndarray] = field(default_factory=list, repr=False)

    def step(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray],
             direction: str = "descent") -> Sequence[np.ndarray]:
        sign = _sign(direction)
        _check_grads(params, grads)
        if not self.m:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        elif len(self.m) != len(params) or any(m.shape != p.shape for m, p in zip(self.m, params)):
            raise DimensionError("Adam moment buffers do not match the parameters")
        self.steps += 1
        bc1 = 1.0 - self.beta1 ** self.steps
        bc2 = 1.0 - self.beta2 ** self.steps
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p += sign * self.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
        return params


def optimizer_step(state: SGD | Adam, params: Sequence[np.ndarray], grads: Sequence[np.ndarray],
                   direction: str = "descent") -> Sequence[np.ndarray]:
    return state.step(params, grads, direction)


# ---------------------------------------------------------------- Gaussians

@dataclass
class DiagonalGaussian:
    """Diagonal Gaussian over the last axis. Leading axes are batch axes."""

    mean: np.ndarray
    log_std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.log_std = np.asarray(self.log_std, dtype=np.float64)
        if self.mean.shape != self.log_std.shape:
            raise DimensionError(
                f"mean shape {self.mean.shape} != log_std shape {self.log_std.shape}"
            )

    @property
    def dim(self) -> int:
        return self.mean.shape[-1]

    @property
    def clipped_log_std(self) -> np.ndarray:
        return np.clip(self.log_std, LOG_STD_MIN, LOG_STD_MAX)

    @property
    def std(self) -> np.ndarray:
        return np.exp(self.clipped_log_std)

    def _clip_mask(self) -> np.ndarray:
        return ((self.log_std >= LOG_STD_MIN) & (self.log_std <= LOG_STD_MAX)).astype(np.float64)

    @classmethod
    def from_head(cls, out: np.ndarray) -> "DiagonalGaussian":
        """Split a network output ``[..., 2d]`` into mean and log-std halves."""
        d = out.shape[-1] // 2
        return cls(out[..., :d], out[..., d:])


def _same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{what}: shape {a.shape} != {b.shape}")


def gaussian_sample(dist: DiagonalGaussian, noise: np.ndarray) -> np.ndarray:
    """Reparameterized draw ``mean + std * noise``."""
    noise = np.asarray(noise, dtype=np.float64)
    _same_shape(noise, dist.mean, "noise vs distribution")
    return dist.mean + dist.std * noise


def gaussian_log_prob(dist: DiagonalGaussian, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Log density summed over the last axis, plus its gradient w.r.t. mean and log_std."""
    z = np.asarray(z, dtype=np.float64)
    _same_shape(z, dist.mean, "sample vs distribution")
    ls = dist.clipped_log_std
    var = np.exp(2.0 * ls)
    diff = z - dist.mean
    logp = np.sum(-0.5 * LOG_2PI - ls - 0.5 * diff * diff / var, axis=-1)
    d_mean = diff / var
    d_log_std = (-1.0 + diff * diff / var) * dist._clip_mask()
    return logp, d_mean, d_log_std


def kl_diag_gaussians(q: DiagonalGaussian, p: DiagonalGaussian) -> np.ndarray:
    """KL(q || p) summed over the last axis."""
    _same_shape(q.mean, p.mean, "KL operands")
    lq, lp = q.clipped_log_std, p.clipped_log_std
    vq, vp = np.exp(2.0 * lq), np.exp(2.0 * lp)
    diff = q.mean - p.mean
    return np.sum(lp - lq + (vq + diff * diff) / (2.0 * vp) - 0.5, axis=-1)


def kl_diag_gaussians_grad(q: DiagonalGaussian, p: DiagonalGaussian):
    """Gradients of KL(q || p) w.r.t. (q.mean, q.log_std, p.mean, p.log_std)."""
    _same_shape(q.mean, p.mean, "KL operands")
    lq, lp = q.clipped_log_std, p.clipped_log_std
    vq, vp = np.exp(2.0 * lq), np.exp(2.0 * lp)
    diff = q.mean - p.mean
    d_qm = diff / vp
    d_qls = (-1.0 + vq / vp) * q._clip_mask()
    d_pm = -d_qm
    d_pls = (1.0 - (vq + diff * diff) / vp) * p._clip_mask()
    return d_qm, d_qls, d_pm, d_pls
