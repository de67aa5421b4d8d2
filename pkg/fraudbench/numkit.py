# Copyright 2026 The fraudbench Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Dense feed-forward networks with hand-derived backpropagation.

Shared by the auto-encoder, the GAN triple and the RBM optimiser. Arrays
are float64 throughout; a batch is a ``(rows, features)`` matrix.
"""

import logging
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import expit

from fraudbench.errors import NumkitError, TrainingDivergedError

logger = logging.getLogger(__name__)

ActivationKind = Literal["relu", "leaky_relu", "linear", "sigmoid", "tanh"]
PIECEWISE: frozenset[str] = frozenset({"relu", "leaky_relu"})
DEFAULT_LEAKY_SLOPE = 0.2
DEFAULT_BATCH_SIZE = 64


@dataclass(frozen=True)
class Activation:
    kind: ActivationKind = "linear"
    slope: float = DEFAULT_LEAKY_SLOPE

    def __call__(self, z: np.ndarray) -> np.ndarray:
        if self.kind == "relu":
            return np.maximum(z, 0.0)
        if self.kind == "leaky_relu":
            return np.where(z > 0, z, self.slope * z)
        if self.kind == "sigmoid":
            return expit(z)
        if self.kind == "tanh":
            return np.tanh(z)
        return z

    def derivative(self, z: np.ndarray, a: np.ndarray) -> np.ndarray:
        """d act / dz given pre-activation ``z`` and output ``a``."""
        if self.kind == "relu":
            return (z > 0).astype(np.float64)
        if self.kind == "leaky_relu":
            return np.where(z > 0, 1.0, self.slope)
        if self.kind == "sigmoid":
            return a * (1.0 - a)
        if self.kind == "tanh":
            return 1.0 - a * a
        return np.ones_like(z)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "slope": self.slope}


def encode_array(array: np.ndarray) -> dict:
    """Shape header plus row-major values; JSON floats round-trip exactly."""
    array = np.asarray(array, dtype=np.float64)
    return {"shape": list(array.shape), "values": array.ravel(order="C").tolist()}


def decode_array(payload: dict) -> np.ndarray:
    values = np.asarray(payload["values"], dtype=np.float64)
    shape = tuple(payload["shape"])
    if values.size != int(np.prod(shape, dtype=np.int64)):
        raise NumkitError(f"array payload has {values.size} values for shape {shape}")
    return values.reshape(shape, order="C")


@dataclass
class DenseLayer:
    weight: np.ndarray  # (fan_in, fan_out)
    bias: np.ndarray  # (fan_out,)
    activation: Activation

    @property
    def fan_in(self) -> int:
        return int(self.weight.shape[0])

    @property
    def fan_out(self) -> int:
        return int(self.weight.shape[1])


@dataclass
class ForwardCache:
    """Inputs, pre-activations and outputs of every layer of one forward pass."""

    inputs: list[np.ndarray] = field(default_factory=list)
    pre: list[np.ndarray] = field(default_factory=list)
    post: list[np.ndarray] = field(default_factory=list)
    kinds: list[str] = field(default_factory=list)

    def activation_pattern(self) -> np.ndarray:
        """Signs of the pre-activations feeding piecewise-linear units."""
        parts = [(z > 0).ravel() for z, kind in zip(self.pre, self.kinds, strict=True) if kind in PIECEWISE]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=bool)


@dataclass
class Gradients:
    """Parameter gradients in ``DenseNet.parameters()`` order, plus d loss / d input."""

    params: list[np.ndarray]
    inputs: np.ndarray


@dataclass
class LossResult:
    """A loss value, its parameter gradients and the forward caches behind it."""

    value: float
    grads: list[np.ndarray]
    caches: list[ForwardCache]

    def activation_pattern(self) -> np.ndarray:
        return np.concatenate([cache.activation_pattern() for cache in self.caches])


@dataclass
class DenseNet:
    layers: list[DenseLayer]
    rng_seed: int = 0

    def __post_init__(self) -> None:
        for prev, nxt in zip(self.layers, self.layers[1:], strict=False):
            if prev.fan_out != nxt.fan_in:
                raise NumkitError(
                    f"layer widths {prev.fan_out} -> {nxt.fan_in} are incompatible"
                )

    @classmethod
    def build(
        cls,
        input_dim: int,
        widths: Sequence[int],
        activations: Sequence[Activation | ActivationKind],
        seed: int,
    ) -> "DenseNet":
        """Glorot-uniform weights, zero biases."""
        if len(widths) != len(activations):
            raise NumkitError("one activation per layer is required")
        rng = np.random.default_rng(seed)
        layers = []
        fan_in = input_dim
        for width, act in zip(widths, activations, strict=True):
            limit = np.sqrt(6.0 / (fan_in + width))
            layers.append(
                DenseLayer(
                    weight=rng.uniform(-limit, limit, size=(fan_in, width)),
                    bias=np.zeros(width),
                    activation=act if isinstance(act, Activation) else Activation(act),
                )
            )
            fan_in = width
        return cls(layers, seed)

    @property
    def input_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def output_dim(self) -> int:
        return self.layers[-1].fan_out

    def parameters(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for layer in self.layers:
            out.extend((layer.weight, layer.bias))
        return out

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.parameters())

    def copy(self) -> "DenseNet":
        return DenseNet(
            [DenseLayer(lay.weight.copy(), lay.bias.copy(), lay.activation) for lay in self.layers],
            self.rng_seed,
        )

    def __call__(self, batch: np.ndarray) -> np.ndarray:
        return forward(self, batch)[0]

    def to_dict(self) -> dict:
        return {
            "rng_seed": self.rng_seed,
            "layers": [
                {
                    "weight": encode_array(layer.weight),
                    "bias": encode_array(layer.bias),
                    "activation": layer.activation.to_dict(),
                }
                for layer in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DenseNet":
        layers = [
            DenseLayer(
                decode_array(item["weight"]),
                decode_array(item["bias"]),
                Activation(**item["activation"]),
            )
            for item in payload["layers"]
        ]
        return cls(layers, int(payload.get("rng_seed", 0)))


def forward(net: DenseNet, batch: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Runs ``batch`` through every layer.

    Args:
        net: the network.
        batch: (n, input_dim) rows.

    Returns:
        The (n, output_dim) output and the cache ``backward`` needs.

    Raises:
        NumkitError: ``batch`` is not 2-D or has the wrong width.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != net.input_dim:
        raise NumkitError(
            f"batch shape {batch.shape} does not match input width {net.input_dim}"
        )
    cache = ForwardCache()
    a = batch
    for layer in net.layers:
        z = a @ layer.weight + layer.bias
        cache.inputs.append(a)
        cache.pre.append(z)
        a = layer.activation(z)
        cache.post.append(a)
        cache.kinds.append(layer.activation.kind)
    return a, cache


def backward(net: DenseNet, cache: ForwardCache, loss_grad: np.ndarray) -> Gradients:
    """Back-propagates d loss / d output through the cached forward pass."""
    if len(cache.pre) != len(net.layers):
        raise NumkitError("cache was produced by a different network")
    delta = np.asarray(loss_grad, dtype=np.float64)
    if delta.shape != cache.post[-1].shape:
        raise NumkitError(
            f"loss gradient shape {delta.shape} does not match output {cache.post[-1].shape}"
        )
    grads: list[np.ndarray] = [np.empty(0)] * (2 * len(net.layers))
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        x, z, a = cache.inputs[i], cache.pre[i], cache.post[i]
        if x.shape[1] != layer.fan_in or z.shape[1] != layer.fan_out:
            raise NumkitError(f"stale cache at layer {i}")
        delta = delta * layer.activation.derivative(z, a)
        grads[2 * i] = x.T @ delta
        grads[2 * i + 1] = delta.sum(axis=0)
        delta = delta @ layer.weight.T
    return Gradients(grads, delta)


@dataclass
class OptimizerState:
    """SGD or Adam state; moment buffers mirror the parameter list."""

    kind: Literal["sgd", "adam"] = "adam"
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise NumkitError(f"learning rate must be positive, got {self.learning_rate}")


def step(
    params: Sequence[np.ndarray], gradients: Sequence[np.ndarray], state: OptimizerState
) -> Sequence[np.ndarray]:
    """Updates ``params`` in place and returns them.

    Args:
        params: arrays to update, modified in place.
        gradients: one gradient per array, same shapes.
        state: SGD or Adam settings; Adam moments live here across calls.

    Returns:
        ``params``.

    Raises:
        NumkitError: the lists differ in length or a shape mismatches.
    """
    if len(params) != len(gradients):
        raise NumkitError("parameter and gradient lists differ in length")
    for p, g in zip(params, gradients, strict=True):
        if p.shape != np.shape(g):
            raise NumkitError(f"gradient shape {np.shape(g)} does not match {p.shape}")

    if state.kind == "sgd":
        for p, g in zip(params, gradients, strict=True):
            p -= state.learning_rate * g
        return params

    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.t += 1
    correction1 = 1.0 - state.beta1**state.t
    correction2 = 1.0 - state.beta2**state.t
    for p, g, m, v in zip(params, gradients, state.m, state.v, strict=True):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
    return params


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean over rows of the per-row squared error summed over columns."""
    diff = pred - target
    n = pred.shape[0]
    return float(np.sum(diff * diff) / n), 2.0 * diff / n


def bce_with_logits(logits: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy of sigmoid(logits) against 0/1 targets."""
    n = logits.shape[0]
    # -[y log s(l) + (1 - y) log(1 - s(l))] = softplus(l) - y * l
    loss = np.logaddexp(0.0, logits) - targets * logits
    return float(loss.sum() / n), (expit(logits) - targets) / n


def check_finite(name: str, *nets: DenseNet) -> None:
    if not all(net.is_finite() for net in nets):
        raise TrainingDivergedError(f"{name}: parameters became non-finite")


def spawn_seeds(seed: int, n: int) -> list[int]:
    """Independent child seeds derived from one parent seed."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(child.generate_state(1, dtype=np.uint32)[0]) for child in children]


def minibatches(n: int, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def finite_difference(
    objective: Callable[[], tuple[float, np.ndarray]],
    array: np.ndarray,
    eps: float = 1e-5,
) -> tuple[np.ndarray, np.ndarray]:
    """Central differences of ``objective`` w.r.t. every entry of ``array``.

    ``objective`` returns (loss, activation pattern). Entries whose +/- eps
    evaluations land on different sides of a ReLU kink are flagged False in
    the returned mask.
    """
    grad = np.zeros_like(array)
    mask = np.ones(array.shape, dtype=bool)
    flat, gflat, mflat = array.reshape(-1), grad.reshape(-1), mask.reshape(-1)
    _, base = objective()
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + eps
        plus, pattern_plus = objective()
        flat[i] = original - eps
        minus, pattern_minus = objective()
        flat[i] = original
        gflat[i] = (plus - minus) / (2.0 * eps)
        mflat[i] = np.array_equal(pattern_plus, base) and np.array_equal(pattern_minus, base)
    return grad, mask


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    diff = np.linalg.norm(np.ravel(analytic) - np.ravel(numeric))
    scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), floor)
    return float(diff / scale)
