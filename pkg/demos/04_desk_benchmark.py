"""A small benchmark: five losses on two-moons, a few seeds, shortened training.

The full run (200 epochs, five seeds) is ``losslab bench``; this one takes
well under a minute.
"""

# %%
from losslab import harness
from losslab.data import gen_two_moons, split

train_ds, test_ds = split(gen_two_moons(1000, 0.1, seed=3), 0.2, seed=0)
print(train_ds.features.shape, train_ds.class_counts())

# %%
base = harness.TrainConfig(epochs=40)
table = harness.bench_losses(list(harness.BENCH_LINEUP), base, train_ds, test_ds, seeds=[0, 1])
for row in table.summary():
    print(row["rank"], row["loss_name"], round(row["mean_test_acc"], 4))

# %%
# Per-epoch curves for one cell; all cells share init and batch order, so
# differences come from the loss alone.
rec = table.cell(0, 0)
for epoch in (0, 9, 19, 39):
    print(epoch + 1, round(rec.train_loss[epoch], 5), rec.test_acc[epoch])

# %%
# Curves and summary as CSV text, ready for any plotting tool.
print(harness.curves_csv(table).splitlines()[:3])
print(harness.summary_csv(table))
