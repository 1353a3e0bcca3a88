"""Which loss punishes wrong answers harder? Comparing gradients pointwise."""

# %%
import numpy as np

from losslab import LossSpec, compare_strictness

grid = np.linspace(1e-7, 0.99, 512)
rep = compare_strictness(LossSpec("m"), LossSpec("ce"), grid, targets=(1,))

# Magnitudes: |dM| = 1/y_hat**2 never falls below |dCE| = 1/y_hat on (0, 1].
print("magnitude:", rep.magnitude.verdict.value)
# Signed slopes are negative here, so the literal ordering flips.
print("signed:   ", rep.literal.verdict.value)

# %%
# Some pairs cross over and neither dominates; witnesses show where.
rep = compare_strictness(LossSpec("m"), LossSpec("tan"), grid)
print(rep.magnitude.verdict.value)
print("M steeper at", rep.magnitude.l1_above[:1])
print("Tan steeper at", rep.magnitude.l1_below[:1])

# %%
# Log base e reproduces cross-entropy exactly.
rep = compare_strictness(LossSpec("ce", "single"), LossSpec("param_log", "single", alpha=np.e), grid)
print(rep.literal.verdict.value)
