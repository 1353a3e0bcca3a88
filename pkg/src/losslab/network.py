"""Dense feedforward classifier with hand-written backpropagation.

Weights are stored ``(fan_out, fan_in)`` so a layer computes
``z = a_prev @ W.T + b``.  The output head is either one sigmoid unit giving
``P(y = 1 | x)`` or a softmax over ``C >= 2`` units; in both cases the loss is
the per-output sum from :func:`losslab.losses.multiclass_loss`, averaged over
the batch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadShape, DimensionMismatch, EmptyBatch
from .losses import LossSpec, clamp, eval_loss, grad_loss, multiclass_grad, multiclass_loss

HIDDEN_ACTIVATIONS = ("relu", "sigmoid", "tanh")
OUTPUT_HEADS = ("sigmoid", "softmax")


def _sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _activate(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    return _sigmoid(z)


def _activation_grad(name, z, a):
    if name == "relu":
        return (z > 0).astype(z.dtype)
    if name == "tanh":
        return 1.0 - a * a
    return a * (1.0 - a)


@dataclass
class Network:
    layer_sizes: list
    hidden_activation: str
    output_head: str
    weights: list
    biases: list

    def __post_init__(self):
        self.layer_sizes = [int(n) for n in self.layer_sizes]
        if len(self.layer_sizes) < 2 or min(self.layer_sizes) < 1:
            raise BadShape(f"need at least two positive layer sizes, got {self.layer_sizes}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise BadShape(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_head not in OUTPUT_HEADS:
            raise BadShape(f"unknown output head {self.output_head!r}")
        n_out = self.layer_sizes[-1]
        if self.output_head == "sigmoid" and n_out != 1:
            raise BadShape("a sigmoid head needs exactly one output unit")
        if self.output_head == "softmax" and n_out < 2:
            raise BadShape("a softmax head needs at least two output units")
        n_layers = len(self.layer_sizes) - 1
        if len(self.weights) != n_layers or len(self.biases) != n_layers:
            raise BadShape("one weight matrix and bias vector per layer")
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            shape = (self.layer_sizes[i + 1], self.layer_sizes[i])
            if w.shape != shape or b.shape != (shape[0],):
                raise BadShape(f"layer {i}: expected W{shape} and b({shape[0]},), got {w.shape} and {b.shape}")

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_classes(self) -> int:
        return 2 if self.output_head == "sigmoid" else self.layer_sizes[-1]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "Network":
        return Network(
            list(self.layer_sizes),
            self.hidden_activation,
            self.output_head,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )

    def params(self) -> list:
        """Parameter arrays in a fixed order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def with_params(self, arrays) -> "Network":
        arrays = list(arrays)
        return Network(
            list(self.layer_sizes), self.hidden_activation, self.output_head, arrays[0::2], arrays[1::2]
        )

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.params())

    def to_dict(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "hidden_activation": self.hidden_activation,
            "output_head": self.output_head,
            "weights": [w.ravel().tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d) -> "Network":
        sizes = [int(n) for n in d["layer_sizes"]]
        weights = [
            np.asarray(w, dtype=np.float64).reshape(sizes[i + 1], sizes[i]) for i, w in enumerate(d["weights"])
        ]
        return cls(sizes, d["hidden_activation"], d["output_head"], weights, d["biases"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Network":
        return cls.from_dict(json.loads(text))


@dataclass
class GradientBundle:
    weights: list
    biases: list = field(default_factory=list)

    def params(self) -> list:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params()])

    def norm(self) -> float:
        return float(np.sqrt(sum(float(np.sum(p * p)) for p in self.params())))

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.params())


def init_network(layer_sizes, hidden_activation="tanh", output_head=None, seed=0) -> Network:
    """Scaled-uniform weights, ``bound = sqrt(6 / (fan_in + fan_out))``; zero biases.

    ``output_head`` defaults to sigmoid for one output unit, softmax otherwise.
    """
    sizes = [int(n) for n in layer_sizes]
    if len(sizes) < 2:
        raise BadShape(f"need at least an input and an output layer, got {sizes}")
    if output_head is None:
        output_head = "sigmoid" if sizes[-1] == 1 else "softmax"
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Network(sizes, hidden_activation, output_head, weights, biases)


def _as_batch(net: Network, x):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.n_inputs:
        raise DimensionMismatch(f"expected inputs of width {net.n_inputs}, got shape {np.shape(x)}")
    return x, single


def _forward_cache(net: Network, x):
    acts, pre = [x], []
    a = x
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        pre.append(z)
        if i < last:
            a = _activate(net.hidden_activation, z)
        elif net.output_head == "sigmoid":
            a = _sigmoid(z)
        else:
            a = _softmax(z)
        acts.append(a)
    return pre, acts


def forward(net: Network, x):
    """Output probabilities for one input vector or a batch of rows.

    A sigmoid head returns ``P(y = 1 | x)`` (a scalar for a single input);
    a softmax head returns a probability vector per row.  No clamping is
    applied here; losses clamp their own inputs.
    """
    xb, single = _as_batch(net, x)
    out = _forward_cache(net, xb)[1][-1]
    if net.output_head == "sigmoid":
        out = out[:, 0]
        return float(out[0]) if single else out
    return out[0] if single else out


def predict(net: Network, x) -> np.ndarray:
    """Class indices; argmax ties and ``p == 0.5`` go to the lower class."""
    p = forward(net, np.atleast_2d(x))
    if net.output_head == "sigmoid":
        return (p > 0.5).astype(np.int64)
    return np.argmax(p, axis=1)


def _binary_targets(net: Network, targets, n):
    t = np.asarray(targets, dtype=np.float64)
    if t.ndim == 1:
        t = t[:, None]
    if t.shape[0] != n:
        raise DimensionMismatch(f"{n} inputs but {t.shape[0]} targets")
    if net.output_head == "sigmoid":
        if t.shape[1] == 2:
            t = t[:, 1:]
        elif t.shape[1] != 1:
            raise DimensionMismatch("a sigmoid head takes one-hot pairs or 0/1 targets")
    elif t.shape[1] != net.layer_sizes[-1]:
        raise DimensionMismatch(f"targets have {t.shape[1]} classes, network has {net.layer_sizes[-1]}")
    return t


def _prepare(net, x, targets):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[0] == 0:
        raise EmptyBatch("batch is empty")
    x, _ = _as_batch(net, x)
    return x, _binary_targets(net, targets, x.shape[0])


def _per_sample_loss(net, spec, t, p):
    if net.output_head == "sigmoid":
        return eval_loss(spec, t[:, 0], p[:, 0])
    return multiclass_loss(spec, t, p)


def _output_grad(net, spec, t, p):
    if net.output_head == "sigmoid":
        return np.asarray(grad_loss(spec, t, clamp(spec, p)))
    return multiclass_grad(spec, t, clamp(spec, p))


def batch_loss(net: Network, x, targets, spec: LossSpec) -> float:
    """Mean over the batch of the summed per-output loss."""
    x, t = _prepare(net, x, targets)
    p = _forward_cache(net, x)[1][-1]
    return float(np.mean(_per_sample_loss(net, spec, t, p)))


def backward(net: Network, x, targets, spec: LossSpec):
    """Mean batch loss and its exact gradient with respect to every parameter.

    The softmax Jacobian is applied in full so any catalogue loss chains
    correctly.  Clamping is passed through as the identity: the loss gradient
    is taken at the clamped prediction, so saturated outputs keep a signal.
    """
    x, t = _prepare(net, x, targets)
    n = x.shape[0]
    pre, acts = _forward_cache(net, x)
    p = acts[-1]
    loss = float(np.mean(_per_sample_loss(net, spec, t, p)))
    dl_dp = _output_grad(net, spec, t, p) / n
    if net.output_head == "sigmoid":
        delta = dl_dp * p * (1.0 - p)
    else:
        delta = p * (dl_dp - np.sum(dl_dp * p, axis=1, keepdims=True))

    gw = [None] * len(net.weights)
    gb = [None] * len(net.weights)
    for i in range(len(net.weights) - 1, -1, -1):
        gw[i] = delta.T @ acts[i]
        gb[i] = delta.sum(axis=0)
        if i > 0:
            back = delta @ net.weights[i]
            delta = back * _activation_grad(net.hidden_activation, pre[i - 1], acts[i])
    return loss, GradientBundle(gw, gb)


def finite_diff_grad(net: Network, x, targets, spec: LossSpec, h: float = 1e-6) -> GradientBundle:
    """Central differences of :func:`batch_loss`, one parameter at a time."""
    if not 1e-8 <= h <= 1e-3:
        raise ValueError(f"step h must lie in [1e-8, 1e-3], got {h}")
    x, t = _prepare(net, x, targets)
    params = [p.copy() for p in net.params()]
    grads = []
    for k, arr in enumerate(params):
        g = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + h
            up = batch_loss(net.with_params(params), x, t, spec)
            arr[idx] = orig - h
            down = batch_loss(net.with_params(params), x, t, spec)
            arr[idx] = orig
            g[idx] = (up - down) / (2.0 * h)
        grads.append(g)
    return GradientBundle(grads[0::2], grads[1::2])


def save_network(net: Network, path) -> None:
    with open(path, "w") as fh:
        json.dump(net.to_dict(), fh)


def load_network(path) -> Network:
    with open(path) as fh:
        return Network.from_dict(json.load(fh))
