"""Checking derivatives two ways: per loss, and through a whole network."""

# %%
import numpy as np

from losslab import LossSpec, catalogue, eval_loss, grad_loss, probe_properties
from losslab.network import backward, finite_diff_grad, init_network

# Central differences against the closed-form slope of one loss.
spec = LossSpec("sec")
p, h = np.linspace(0.05, 0.95, 7), 1e-6
ones = np.ones_like(p, dtype=int)
fd = (eval_loss(spec, ones, p + h) - eval_loss(spec, ones, p - h)) / (2 * h)
print(np.c_[p, grad_loss(spec, ones, p), fd])

# %%
# The property probe bundles zero-at-target, convexity, divergence and the
# gradient check into one report.
report = probe_properties(LossSpec("tan"))
for res in report.results.values():
    print(f"{res.name:<15} {res.passed}  {res.detail}")

# %%
# A deliberately non-convex two-parameter L shows what a failure looks like.
bad = probe_properties(LossSpec("two_param_l", alpha=0.5, beta=5))
print(bad["convexity"].passed, bad["convexity"].witnesses[:2])

# %%
# Backprop through a small softmax net agrees with finite differences.
net = init_network([2, 3, 2], "tanh", seed=11)
rng = np.random.default_rng(0)
x = rng.normal(size=(8, 2))
t = np.eye(2)[rng.integers(0, 2, size=8)]
for spec in catalogue()[:4]:
    _, g = backward(net, x, t, spec)
    diff = np.abs(g.flat() - finite_diff_grad(net, x, t, spec).flat()).max()
    print(f"{spec.name:<22} max abs diff {diff:.2e}")
