"""Plain SGD and bias-corrected Adam over a :class:`~losslab.network.Network`.

:func:`step` is functional: it returns a new network and a new optimizer state
and leaves its inputs untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NonFiniteGradient, ShapeMismatch
from .network import GradientBundle, Network

OPTIMIZERS = ("sgd", "adam")


@dataclass
class OptimizerState:
    kind: str = "adam"
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    step_count: int = 0

    def __post_init__(self):
        self.kind = str(self.kind).lower()
        if self.kind not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.kind!r}")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("adam betas must lie in (0, 1)")
        if not self.epsilon > 0:
            raise ValueError("adam epsilon must be positive")

    def config(self) -> dict:
        """Hyperparameters only, without accumulated moments."""
        return {
            "kind": self.kind,
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_config(cls, d) -> "OptimizerState":
        return cls(**{k: d[k] for k in ("kind", "learning_rate", "beta1", "beta2", "epsilon") if k in d})

    def fresh(self) -> "OptimizerState":
        return replace(self, m=[], v=[], step_count=0)


def sgd(learning_rate=1e-2) -> OptimizerState:
    return OptimizerState("sgd", learning_rate)


def adam(learning_rate=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8) -> OptimizerState:
    return OptimizerState("adam", learning_rate, beta1, beta2, epsilon)


def step(state: OptimizerState, net: Network, grads: GradientBundle):
    """Apply one update; returns ``(new_net, new_state)``."""
    params = net.params()
    gs = grads.params()
    if len(gs) != len(params) or any(g.shape != p.shape for g, p in zip(gs, params)):
        raise ShapeMismatch("gradient bundle does not match the network")
    if not grads.is_finite():
        raise NonFiniteGradient("gradient contains NaN or inf")

    lr = state.learning_rate
    t = state.step_count + 1
    if state.kind == "sgd":
        new_params = [p - lr * g for p, g in zip(params, gs)]
        return net.with_params(new_params), replace(state, step_count=t)

    m_prev = state.m or [np.zeros_like(p) for p in params]
    v_prev = state.v or [np.zeros_like(p) for p in params]
    if any(m.shape != p.shape for m, p in zip(m_prev, params)) or len(m_prev) != len(params):
        raise ShapeMismatch("optimizer moments do not match the network")
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, gs, m_prev, v_prev):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        new_params.append(p - lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon))
        new_m.append(m)
        new_v.append(v)
    return net.with_params(new_params), replace(state, m=new_m, v=new_v, step_count=t)
