"""Tour of the loss catalogue: values, slopes and the shape of each curve."""

# %%
import numpy as np

from losslab import LossSpec, catalogue, eval_loss, export_loss_curve, grad_loss

# Every catalogue entry at its default parameters.
for spec in catalogue():
    print(spec.name)

# %%
# A confident wrong answer (y_hat = 0.05 when the target is 1) is where the
# families part ways. Cross-entropy's slope is -1/y_hat; M's is -1/y_hat**2.
for name in ("ce", "m", "l", "tan", "sec"):
    spec = LossSpec(name)
    print(f"{spec.name:<22} loss {eval_loss(spec, 1, 0.05):10.4f}  grad {grad_loss(spec, 1, 0.05):12.4f}")

# %%
# Single-sided variants ignore the y = 0 component entirely.
m1 = LossSpec("m", "single")
print(eval_loss(m1, 0, 0.9), eval_loss(m1, 1, 0.9))

# %%
# Vectorised evaluation over a grid, and the same data as a sampled curve.
grid = np.linspace(0.1, 0.9, 5)
print(eval_loss(LossSpec("tan"), np.ones(5, dtype=int), grid))
curve = export_loss_curve(LossSpec("l"), y=1, n_points=5)
print(curve)

# %%
# Parametrised families: alpha sharpens or softens the penalty.
for alpha in (1.0, 2.0, 3.0):
    spec = LossSpec("param_m", alpha=alpha)
    print(spec.name, eval_loss(spec, 1, 0.2))
