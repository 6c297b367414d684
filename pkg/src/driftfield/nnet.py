"""Fully connected generator with hand-written backpropagation and Adam.

The drifting loss regresses generator outputs onto the frozen targets
x + V, where V is the drift field evaluated at the current outputs. Only
the x inside the residual carries gradient, so the parameter gradient is
-(1/n) sum_i J_f(eps_i)^T V_i.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .datasets import sample_prior
from .drift import DriftConfig, drift_field
from .errors import ConfigError, NumericalError
from .geometry import PointCloud, RngState
from .metrics import exact_w2sq


class Activation(str, Enum):
    RELU = "relu"
    TANH = "tanh"


@dataclass
class GeneratorParams:
    """Layer weights/biases; weights[i] has shape (fan_in, fan_out)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: Activation

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ConfigError("need one bias per weight matrix and at least one layer")
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.ndim != 2 or b.ndim != 1 or W.shape[1] != b.shape[0]:
                raise ConfigError(f"layer {i}: weight {W.shape} and bias {b.shape} do not chain")
            if i > 0 and self.weights[i - 1].shape[1] != W.shape[0]:
                raise ConfigError(f"layer {i}: fan-in {W.shape[0]} does not match previous fan-out")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise ConfigError(f"layer {i}: parameters must be finite")

    @property
    def d_in(self) -> int:
        return self.weights[0].shape[0]

    @property
    def d_out(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.d_in] + [W.shape[1] for W in self.weights]


def init_params(layer_sizes: list[int], activation: Activation, rng: RngState) -> GeneratorParams:
    """Uniform fan-in initialization: W, b ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    if len(layer_sizes) < 2:
        raise ConfigError("need at least input and output sizes")
    gen = rng.generator
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(gen.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(gen.uniform(-bound, bound, size=fan_out))
    return GeneratorParams(weights, biases, Activation(activation))


def _act(z: np.ndarray, kind: Activation) -> np.ndarray:
    if kind is Activation.RELU:
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _act_grad(z: np.ndarray, kind: Activation) -> np.ndarray:
    if kind is Activation.RELU:
        return (z > 0).astype(np.float64)
    t = np.tanh(z)
    return 1.0 - t * t


def _forward_cached(params: GeneratorParams, eps: np.ndarray):
    h = eps
    pre: list[np.ndarray] = []
    post: list[np.ndarray] = [h]
    last = len(params.weights) - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ W + b
        pre.append(z)
        h = z if i == last else _act(z, params.activation)
        post.append(h)
    return h, pre, post


def forward(params: GeneratorParams, E: PointCloud) -> PointCloud:
    """Evaluate the generator on a noise batch; last layer is affine."""
    if E.d != params.d_in:
        raise ConfigError(f"noise dimension {E.d} does not match generator input {params.d_in}")
    out, _, _ = _forward_cached(params, E.points)
    return PointCloud(out)


def _backward(params: GeneratorParams, pre, post, dloss_dout: np.ndarray):
    grads_w = [None] * len(params.weights)
    grads_b = [None] * len(params.biases)
    delta = dloss_dout
    for i in range(len(params.weights) - 1, -1, -1):
        grads_w[i] = post[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * _act_grad(pre[i - 1], params.activation)
    return grads_w, grads_b


def loss_and_grad_for_velocities(params: GeneratorParams, E: PointCloud, velocities: np.ndarray):
    """Drifting loss/gradient for a fixed (already detached) velocity array."""
    out, pre, post = _forward_cached(params, E.points)
    if velocities.shape != out.shape:
        raise ConfigError(f"velocity shape {velocities.shape} does not match output {out.shape}")
    n = out.shape[0]
    loss = float(0.5 / n * np.sum(velocities * velocities))
    # residual x - sg(x + V) has value -V; only x carries gradient
    dloss_dout = -velocities / n
    grads_w, grads_b = _backward(params, pre, post, dloss_dout)
    return loss, (grads_w, grads_b)


def drifting_loss_and_grad(params: GeneratorParams, E: PointCloud, Y_data: PointCloud, cfg: DriftConfig):
    """Loss (1/2n) sum ||V_i||^2 and its parameter gradient, V detached."""
    if E.n != Y_data.n:
        raise ConfigError(f"noise batch {E.n} and data batch {Y_data.n} must match")
    X = forward(params, E)
    V = drift_field(X, Y_data, X, cfg)
    return loss_and_grad_for_velocities(params, E, V.velocities)


@dataclass
class AdamState:
    """First/second moment accumulators, one pair per parameter array."""

    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_num: float = 1e-8

    @staticmethod
    def init_like(params: GeneratorParams, lr: float = 1e-3, beta1: float = 0.9,
                  beta2: float = 0.999, eps_num: float = 1e-8) -> "AdamState":
        return AdamState(
            m_w=[np.zeros_like(W) for W in params.weights],
            v_w=[np.zeros_like(W) for W in params.weights],
            m_b=[np.zeros_like(b) for b in params.biases],
            v_b=[np.zeros_like(b) for b in params.biases],
            lr=lr, beta1=beta1, beta2=beta2, eps_num=eps_num,
        )


def adam_step(params: GeneratorParams, grads, state: AdamState) -> None:
    """One in-place Adam update with bias correction."""
    grads_w, grads_b = grads
    state.step += 1
    c1 = 1.0 - state.beta1 ** state.step
    c2 = 1.0 - state.beta2 ** state.step
    for ps, gs, ms, vs in (
        (params.weights, grads_w, state.m_w, state.v_w),
        (params.biases, grads_b, state.m_b, state.v_b),
    ):
        for p, g, m, v in zip(ps, gs, ms, vs):
            m *= state.beta1
            m += (1.0 - state.beta1) * g
            v *= state.beta2
            v += (1.0 - state.beta2) * (g * g)
            p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps_num)


@dataclass(frozen=True)
class TrainRecord:
    iteration: int
    loss: float
    w2sq: float
    seconds: float


def train(
    params: GeneratorParams,
    target_sampler,
    cfg: DriftConfig,
    iters: int,
    batch_n: int,
    lr: float,
    eval_every: int,
    rng: RngState,
) -> tuple[GeneratorParams, list[TrainRecord]]:
    """Stop-gradient drifting training loop.

    target_sampler(n, rng) -> PointCloud supplies a fresh data batch every
    iteration. A held-out evaluation pair (noise, data) is drawn up front
    from the same stream, so records are reproducible per seed; W2^2 against
    it is logged every eval_every iterations and at the last one.
    """
    if iters < 0:
        raise ConfigError(f"iters must be >= 0, got {iters}")
    if batch_n < 1:
        raise ConfigError(f"batch size must be >= 1, got {batch_n}")
    if eval_every < 1:
        raise ConfigError(f"eval_every must be >= 1, got {eval_every}")
    eval_noise = sample_prior(batch_n, params.d_in, rng)
    eval_data = target_sampler(batch_n, rng)
    state = AdamState.init_like(params, lr=lr)
    records: list[TrainRecord] = []
    t0 = time.perf_counter()
    for it in range(1, iters + 1):
        E = sample_prior(batch_n, params.d_in, rng)
        Y = target_sampler(batch_n, rng)
        loss, grads = drifting_loss_and_grad(params, E, Y, cfg)
        if not np.isfinite(loss):
            raise NumericalError(
                f"non-finite loss at iteration {it} "
                f"(scheme={cfg.scheme.value}, tau={cfg.tau})"
            )
        adam_step(params, grads, state)
        if it % eval_every == 0 or it == iters:
            gen_cloud = forward(params, eval_noise)
            w2 = exact_w2sq(gen_cloud, eval_data).total_cost
            records.append(TrainRecord(it, loss, w2, time.perf_counter() - t0))
    return params, records


def save_checkpoint(params: GeneratorParams, path) -> None:
    """Textual checkpoint: layer shapes plus row-major values, JSON encoded."""
    payload = {
        "activation": params.activation.value,
        "layer_sizes": params.layer_sizes,
        "layers": [
            {"weight": W.tolist(), "bias": b.tolist()}
            for W, b in zip(params.weights, params.biases)
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> GeneratorParams:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    weights = [np.asarray(layer["weight"], dtype=np.float64) for layer in payload["layers"]]
    biases = [np.asarray(layer["bias"], dtype=np.float64) for layer in payload["layers"]]
    return GeneratorParams(weights, biases, Activation(payload["activation"]))
