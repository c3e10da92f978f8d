"""A small dense-network engine with explicit backpropagation.

The toolkit needs gradients with respect to *inputs* as well as parameters
(the generator perturbs its window through the input gradient), so the
engine is written out by hand rather than delegated to an autodiff
framework.  All internal arithmetic is float64; parameters are quantised
to the float32 grid when a model is frozen so that a model in memory and
its on-disk encoding are the same function.

Loss is mean absolute error toward a constant target.  The subgradient of
|r| at r = 0 is taken as 0.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    FrozenModelRequired,
    ParseError,
    SchemaVersionError,
    ShapeError,
    TrainingDiverged,
)

__all__ = [
    "ACTIVATIONS",
    "DenseLayer",
    "Network",
    "TrainingConfig",
    "TrainingLog",
    "new_inner_network",
    "forward",
    "loss_mae",
    "grad_params",
    "grad_inputs",
    "train_inner",
    "save_model",
    "load_model",
    "require_frozen",
    "INNER_LAYOUT",
]

ACTIVATIONS = ("sigmoid", "relu")

# Inner-model layout: feature width per layer and its activation.
INNER_LAYOUT = ((200, 64, "sigmoid"), (64, 32, "relu"), (32, 16, "relu"), (16, 1, "sigmoid"))

MODEL_MAGIC = b"EFNN"
MODEL_VERSION = 1


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Stable in both tails.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "sigmoid":
        return _sigmoid(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    raise ShapeError(f"unknown activation {name!r}")


def _act_deriv(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "relu":
        # Subgradient 0 at the kink.
        return (z > 0.0).astype(np.float64)
    raise ShapeError(f"unknown activation {name!r}")


@dataclass
class DenseLayer:
    """Fully connected layer, weights shaped (out_dim, in_dim)."""

    weights: np.ndarray
    biases: np.ndarray
    activation: str

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64).ravel()
        if self.weights.ndim != 2:
            raise ShapeError("weights must be 2-D")
        if self.biases.size != self.weights.shape[0]:
            raise ShapeError("bias length must equal out_dim")
        if self.activation not in ACTIVATIONS:
            raise ShapeError(f"unknown activation {self.activation!r}")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class Network:
    """A stack of dense layers ending in a scalar output."""

    layers: list
    frozen: bool = False

    def __post_init__(self) -> None:
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise ShapeError(f"layer widths {a.out_dim} and {b.in_dim} do not chain")

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def quantize(self) -> None:
        """Snap parameters to the float32 grid (the on-disk precision)."""
        for layer in self.layers:
            layer.weights = layer.weights.astype(np.float32).astype(np.float64)
            layer.biases = layer.biases.astype(np.float32).astype(np.float64)


def new_inner_network(rng_seed: int = 0) -> Network:
    """Build the untrained inner model: 200-64-32-16-1.

    Weights and biases start uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
    """
    rng = np.random.default_rng(rng_seed)
    layers = []
    for in_dim, out_dim, act in INNER_LAYOUT:
        bound = 1.0 / np.sqrt(in_dim)
        w = rng.uniform(-bound, bound, size=(out_dim, in_dim))
        b = rng.uniform(-bound, bound, size=out_dim)
        layers.append(DenseLayer(weights=w, biases=b, activation=act))
    return Network(layers=layers)


def _forward_cached(net: Network, x: np.ndarray):
    a = np.asarray(x, dtype=np.float64).ravel()
    if a.size != net.input_dim:
        raise ShapeError(f"input width {a.size} != network input {net.input_dim}")
    zs, acts = [], [a]
    for layer in net.layers:
        z = layer.weights @ acts[-1] + layer.biases
        zs.append(z)
        acts.append(_act(layer.activation, z))
    return zs, acts


def forward(net: Network, x: np.ndarray) -> float:
    """Scalar network output for one input vector."""
    _, acts = _forward_cached(net, x)
    out = acts[-1]
    if out.size != 1:
        raise ShapeError("forward() expects a scalar-output network")
    return float(out[0])


def loss_mae(pred: float, target: float) -> float:
    return abs(float(pred) - float(target))


def _backprop(net: Network, x: np.ndarray, target: float):
    """Shared pass returning (per-layer dW/db, input gradient, prediction)."""
    zs, acts = _forward_cached(net, x)
    pred = float(acts[-1][0])
    r = pred - float(target)
    # d|r|/dr with subgradient 0 at the kink.
    delta = np.array([np.sign(r)], dtype=np.float64)
    grads = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        delta = delta * _act_deriv(layer.activation, zs[i], acts[i + 1])
        grads[i] = (np.outer(delta, acts[i]), delta.copy())
        delta = layer.weights.T @ delta
    return grads, delta, pred


def grad_params(net: Network, x: np.ndarray, target: float):
    """Per-layer (dL/dW, dL/db) for MAE loss at one sample."""
    grads, _, _ = _backprop(net, x, target)
    return grads


def grad_inputs(net: Network, x: np.ndarray, target: float) -> np.ndarray:
    """dL/dx for MAE loss at one sample; shape matches x."""
    _, dx, _ = _backprop(net, x, target)
    return dx


@dataclass
class TrainingConfig:
    """Inner-model training knobs."""

    learning_rate: float = 0.05
    epochs: int = 20
    target_mae: float = 0.05  # stop once the epoch MAE is at or under this
    target: float = 0.5  # constant label the inner model learns to emit
    rng_seed: int = 0
    holdout_fraction: float = 0.2

    def __post_init__(self) -> None:
        if self.learning_rate < 0 or self.epochs < 0:
            raise ShapeError("learning_rate and epochs must be non-negative")
        if not (0.0 <= self.holdout_fraction < 1.0):
            raise ShapeError("holdout_fraction must be in [0, 1)")


@dataclass
class TrainingLog:
    """Per-epoch mean absolute error plus the held-out summary."""

    epoch_mae: list = field(default_factory=list)
    holdout_mae: float = float("nan")
    holdout_within_target: float = float("nan")  # fraction of |err| <= target_mae
    epochs_run: int = 0


def _as_matrix(corpus) -> np.ndarray:
    rows = []
    for item in corpus:
        rows.append(np.asarray(getattr(item, "values", item), dtype=np.float64).ravel())
    if not rows:
        raise ShapeError("empty training corpus")
    return np.stack(rows)


def train_inner(net: Network, corpus, cfg: TrainingConfig | None = None) -> TrainingLog:
    """Plain per-sample SGD toward a constant target, then freeze.

    The corpus is split once (seeded) into train and held-out parts; the
    held-out part never contributes gradients.  Training stops early when
    an epoch's training MAE reaches cfg.target_mae.  Non-finite losses or
    parameters raise TrainingDiverged.  On return the network is frozen
    with float32-quantised parameters.
    """
    cfg = cfg or TrainingConfig()
    data = _as_matrix(corpus)
    rng = np.random.default_rng(cfg.rng_seed)
    n = data.shape[0]
    n_hold = int(round(n * cfg.holdout_fraction))
    perm = rng.permutation(n)
    hold, train = perm[:n_hold], perm[n_hold:]
    if train.size == 0:
        raise ShapeError("holdout fraction leaves no training rows")

    log = TrainingLog()
    for _ in range(cfg.epochs):
        order = rng.permutation(train)
        total = 0.0
        for idx in order:
            grads, _, pred = _backprop(net, data[idx], cfg.target)
            total += abs(pred - cfg.target)
            for layer, (dw, db) in zip(net.layers, grads):
                layer.weights -= cfg.learning_rate * dw
                layer.biases -= cfg.learning_rate * db
        epoch_mae = total / train.size
        if not np.isfinite(epoch_mae) or not all(
            np.all(np.isfinite(l.weights)) and np.all(np.isfinite(l.biases))
            for l in net.layers
        ):
            raise TrainingDiverged(f"non-finite state at epoch {log.epochs_run + 1}")
        log.epoch_mae.append(epoch_mae)
        log.epochs_run += 1
        if epoch_mae <= cfg.target_mae:
            break

    net.quantize()
    net.frozen = True
    if hold.size:
        errs = np.array([abs(forward(net, data[i]) - cfg.target) for i in hold])
        log.holdout_mae = float(errs.mean())
        log.holdout_within_target = float(np.mean(errs <= cfg.target_mae))
    return log


_ACT_CODE = {"sigmoid": 0, "relu": 1}
_CODE_ACT = {v: k for k, v in _ACT_CODE.items()}


def save_model(net: Network, path) -> None:
    """Write the EFNN container: float32 parameters, little endian."""
    blob = bytearray()
    blob += MODEL_MAGIC
    blob += struct.pack("<HH", MODEL_VERSION, len(net.layers))
    for layer in net.layers:
        blob += struct.pack("<IIB", layer.in_dim, layer.out_dim, _ACT_CODE[layer.activation])
        blob += layer.weights.astype("<f4").tobytes()  # row-major (out_dim, in_dim)
        blob += layer.biases.astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


def load_model(path) -> Network:
    """Read an EFNN container; the result is frozen."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MODEL_MAGIC:
        raise ParseError("not an EFNN model file")
    if len(blob) < 8:
        raise ParseError("truncated EFNN header")
    version, n_layers = struct.unpack_from("<HH", blob, 4)
    if version != MODEL_VERSION:
        raise SchemaVersionError(f"EFNN version {version} unsupported")
    off = 8
    layers = []
    for _ in range(n_layers):
        if off + 9 > len(blob):
            raise ParseError("truncated EFNN layer header")
        in_dim, out_dim, act = struct.unpack_from("<IIB", blob, off)
        off += 9
        if act not in _CODE_ACT:
            raise ParseError(f"unknown activation code {act}")
        wn, bn = 4 * in_dim * out_dim, 4 * out_dim
        if off + wn + bn > len(blob):
            raise ParseError("truncated EFNN parameters")
        w = np.frombuffer(blob, dtype="<f4", count=in_dim * out_dim, offset=off)
        off += wn
        b = np.frombuffer(blob, dtype="<f4", count=out_dim, offset=off)
        off += bn
        layers.append(
            DenseLayer(
                weights=w.astype(np.float64).reshape(out_dim, in_dim),
                biases=b.astype(np.float64),
                activation=_CODE_ACT[act],
            )
        )
    if off != len(blob):
        raise ParseError("trailing bytes after EFNN payload")
    net = Network(layers=layers, frozen=True)
    return net


def require_frozen(net: Network) -> None:
    if not net.frozen:
        raise FrozenModelRequired("this operation needs a trained, frozen model")
