"""Train identical networks under different losses and compare the outcomes.

Everything random in a run (initial weights, batch order) is derived from
``TrainConfig.seed`` alone, so two cells of a bench that share a seed differ
only in their loss.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import optim
from .data import Dataset, gen_gaussian_blobs, gen_two_moons, load_csv, split
from .errors import NonFiniteLoss, ShapeMismatch
from .losses import LossSpec
from .network import backward, init_network, predict

log = logging.getLogger(__name__)

CURVE_COLUMNS = ("run_id", "loss_name", "epoch", "train_loss", "train_acc", "test_acc")


@dataclass
class TrainConfig:
    loss: LossSpec = field(default_factory=lambda: LossSpec("cross_entropy"))
    optimizer: optim.OptimizerState = field(default_factory=optim.adam)
    layer_sizes: list = field(default_factory=lambda: [2, 16, 16, 2])
    hidden_activation: str = "tanh"
    output_head: str | None = None
    batch_size: int = 32
    epochs: int = 200
    steps_per_epoch: int | None = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.loss, (str, dict)):
            self.loss = LossSpec.from_dict(self.loss)
        if isinstance(self.optimizer, dict):
            self.optimizer = optim.OptimizerState.from_config(self.optimizer)
        self.layer_sizes = [int(n) for n in self.layer_sizes]
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.steps_per_epoch is not None and self.steps_per_epoch < 1:
            raise ValueError("steps_per_epoch must be at least 1 when given")

    def to_dict(self) -> dict:
        return {
            "loss": self.loss.to_dict(),
            "optimizer": self.optimizer.config(),
            "network": {
                "layer_sizes": list(self.layer_sizes),
                "hidden_activation": self.hidden_activation,
                "output_head": self.output_head,
            },
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "steps_per_epoch": self.steps_per_epoch,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d) -> "TrainConfig":
        d = dict(d)
        kwargs = {}
        net = d.pop("network", {}) or {}
        for key in ("layer_sizes", "hidden_activation", "output_head"):
            if key in net:
                kwargs[key] = net[key]
            if key in d:
                kwargs[key] = d.pop(key)
        for key in ("loss", "optimizer", "batch_size", "epochs", "steps_per_epoch", "seed"):
            if key in d:
                kwargs[key] = d.pop(key)
        if d:
            raise ValueError(f"unknown training config keys: {sorted(d)}")
        return cls(**kwargs)


@dataclass
class RunRecord:
    run_id: str
    loss_name: str
    config: TrainConfig
    train_loss: list
    train_acc: list
    test_acc: list
    grad_norm_mean: list
    grad_norm_max: list
    final_train_acc: float
    final_test_acc: float
    wall_time: float
    diverged_epoch: int | None = None

    @property
    def converged(self) -> bool:
        return self.diverged_epoch is None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "loss_name": self.loss_name,
            "config": self.config.to_dict(),
            "train_loss": list(self.train_loss),
            "train_acc": list(self.train_acc),
            "test_acc": list(self.test_acc),
            "grad_norm_mean": list(self.grad_norm_mean),
            "grad_norm_max": list(self.grad_norm_max),
            "final_train_acc": self.final_train_acc,
            "final_test_acc": self.final_test_acc,
            "wall_time": self.wall_time,
            "diverged_epoch": self.diverged_epoch,
        }

    @classmethod
    def from_dict(cls, d) -> "RunRecord":
        d = dict(d)
        d["config"] = TrainConfig.from_dict(d["config"])
        return cls(**d)

    def curve_rows(self):
        for i, (tl, ta, te) in enumerate(zip(self.train_loss, self.train_acc, self.test_acc)):
            yield (self.run_id, self.loss_name, i + 1, tl, ta, te)
        if self.diverged_epoch is not None:
            nan = float("nan")
            yield (self.run_id, self.loss_name, self.diverged_epoch, nan, nan, nan)


def accuracy(net, ds: Dataset) -> float:
    return float(np.mean(predict(net, ds.features) == ds.labels))


def _check_shapes(config: TrainConfig, *datasets):
    sizes = config.layer_sizes
    head = config.output_head or ("sigmoid" if sizes[-1] == 1 else "softmax")
    for ds in datasets:
        if ds.n_features != sizes[0]:
            raise ShapeMismatch(f"network takes {sizes[0]} inputs, dataset has {ds.n_features} features")
        n_classes = 2 if head == "sigmoid" else sizes[-1]
        if ds.class_count != n_classes:
            raise ShapeMismatch(f"network predicts {n_classes} classes, dataset has {ds.class_count}")


def _seeds(config: TrainConfig):
    init_seed, batch_seed = np.random.SeedSequence(config.seed).spawn(2)
    return init_seed, batch_seed


def initial_network(config: TrainConfig):
    """The starting weights of a run; depends on the seed and architecture only."""
    init_seed, _ = _seeds(config)
    return init_network(config.layer_sizes, config.hidden_activation, config.output_head, seed=init_seed)


def batch_schedule(config: TrainConfig, n: int):
    """Endless iterator of per-epoch index batches; depends on the seed only."""
    _, batch_seed = _seeds(config)
    return _batches(config, n, np.random.default_rng(batch_seed))


def _batches(config: TrainConfig, n: int, rng):
    """Index batches for every epoch: full passes, or fixed step counts with wraparound."""
    bs = config.batch_size
    if config.steps_per_epoch is None:
        while True:
            perm = rng.permutation(n)
            yield [perm[i : i + bs] for i in range(0, n, bs)]
    perm, pos = rng.permutation(n), 0
    while True:
        epoch = []
        for _ in range(config.steps_per_epoch):
            idx = perm[pos : pos + bs]
            pos += bs
            if idx.size < bs:
                perm = rng.permutation(n)
                pos = bs - idx.size
                idx = np.concatenate([idx, perm[:pos]])
            epoch.append(idx)
        yield epoch


def train(config: TrainConfig, train_ds: Dataset, test_ds: Dataset, run_id: str | None = None) -> RunRecord:
    """One training run.

    A non-finite batch loss or gradient stops the run; the record keeps the
    completed epochs and notes the 1-based epoch where it happened.
    """
    _check_shapes(config, train_ds, test_ds)
    if config.batch_size > len(train_ds):
        raise ValueError(f"batch_size {config.batch_size} exceeds {len(train_ds)} training samples")
    net = initial_network(config)
    state = config.optimizer.fresh()
    x = train_ds.features
    t = train_ds.one_hot()
    curves = {k: [] for k in ("train_loss", "train_acc", "test_acc", "grad_norm_mean", "grad_norm_max")}
    diverged = None

    start = time.perf_counter()
    batches = batch_schedule(config, len(train_ds))
    for epoch in range(1, config.epochs + 1):
        losses, norms = [], []
        try:
            for idx in next(batches):
                with np.errstate(over="ignore", invalid="ignore"):
                    loss, grads = backward(net, x[idx], t[idx], config.loss)
                if not np.isfinite(loss) or not grads.is_finite():
                    raise NonFiniteLoss(f"non-finite loss or gradient in epoch {epoch}")
                net, state = optim.step(state, net, grads)
                losses.append(loss)
                norms.append(grads.norm())
            if not net.is_finite():
                raise NonFiniteLoss(f"parameters became non-finite in epoch {epoch}")
        except NonFiniteLoss as exc:
            log.warning("%s: %s", run_id or config.loss.name, exc)
            diverged = epoch
            break
        curves["train_loss"].append(float(np.mean(losses)))
        curves["train_acc"].append(accuracy(net, train_ds))
        curves["test_acc"].append(accuracy(net, test_ds))
        curves["grad_norm_mean"].append(float(np.mean(norms)))
        curves["grad_norm_max"].append(float(np.max(norms)))
    wall = time.perf_counter() - start

    return RunRecord(
        run_id=run_id or f"{config.loss.name}/seed{config.seed}",
        loss_name=config.loss.name,
        config=config,
        final_train_acc=curves["train_acc"][-1] if curves["train_acc"] else 0.0,
        final_test_acc=curves["test_acc"][-1] if curves["test_acc"] else 0.0,
        wall_time=wall,
        diverged_epoch=diverged,
        **curves,
    )


@dataclass
class BenchTable:
    losses: list
    seeds: list
    records: list

    def cell(self, loss_index: int, seed_index: int) -> RunRecord:
        return self.records[loss_index * len(self.seeds) + seed_index]

    def summary(self) -> list:
        """Per-loss statistics, ranked by mean test accuracy (ties keep list order)."""
        rows = []
        for i, spec in enumerate(self.losses):
            cells = [self.cell(i, j) for j in range(len(self.seeds))]
            test = np.array([r.final_test_acc for r in cells])
            tr = np.array([r.final_train_acc for r in cells])
            rows.append(
                {
                    "loss_index": i,
                    "loss_name": spec.name,
                    "mean_test_acc": float(test.mean()),
                    "min_test_acc": float(test.min()),
                    "max_test_acc": float(test.max()),
                    "mean_train_acc": float(tr.mean()),
                    "min_train_acc": float(tr.min()),
                    "max_train_acc": float(tr.max()),
                    "n_runs": len(cells),
                    "n_diverged": sum(not r.converged for r in cells),
                }
            )
        order = sorted(range(len(rows)), key=lambda k: (-rows[k]["mean_test_acc"], k))
        for rank, k in enumerate(order, start=1):
            rows[k]["rank"] = rank
        return [rows[k] for k in order]

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.records)

    def to_dict(self) -> dict:
        return {
            "losses": [s.to_dict() for s in self.losses],
            "seeds": list(self.seeds),
            "runs": [r.to_dict() for r in self.records],
            "summary": self.summary(),
        }

    @classmethod
    def from_dict(cls, d) -> "BenchTable":
        return cls(
            [LossSpec.from_dict(s) for s in d["losses"]],
            list(d["seeds"]),
            [RunRecord.from_dict(r) for r in d["runs"]],
        )


def _run_cell(args):
    config, train_ds, test_ds, run_id = args
    return train(config, train_ds, test_ds, run_id)


def bench_losses(losses, base_config: TrainConfig, train_ds, test_ds, seeds, workers: int = 1) -> BenchTable:
    """Train every (loss, seed) cell with all other settings held fixed.

    Cells are independent; with ``workers > 1`` they run in separate
    processes.  Results are always ordered by (loss index, seed index).
    """
    losses = [LossSpec.from_dict(s) if not isinstance(s, LossSpec) else s for s in losses]
    seeds = list(seeds)
    if not losses or not seeds:
        raise ValueError("need at least one loss and one seed")
    jobs = []
    for i, spec in enumerate(losses):
        for seed in seeds:
            cfg = replace(base_config, loss=spec, seed=seed)
            jobs.append((cfg, train_ds, test_ds, f"{i}:{spec.name}:seed{seed}"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_cell, jobs))
    else:
        records = [_run_cell(job) for job in jobs]
    return BenchTable(losses, seeds, records)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def _records(obj):
    return obj.records if isinstance(obj, BenchTable) else [obj]


def curves_csv(obj) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_COLUMNS)
    for rec in _records(obj):
        for row in rec.curve_rows():
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def summary_csv(table: BenchTable) -> str:
    cols = (
        "rank",
        "loss_name",
        "mean_test_acc",
        "min_test_acc",
        "max_test_acc",
        "mean_train_acc",
        "min_train_acc",
        "max_train_acc",
        "n_runs",
        "n_diverged",
    )
    buf = io.StringIO()
    w = csv.DictWriter(buf, cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    w.writerows(table.summary())
    return buf.getvalue()


def export_run(obj, fmt: str, path) -> None:
    """Write a RunRecord or BenchTable as per-epoch CSV curves or full JSON."""
    fmt = fmt.lower()
    if fmt == "csv":
        text = curves_csv(obj)
    elif fmt == "json":
        text = json.dumps(obj.to_dict(), indent=1)
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    with open(path, "w", newline="") as fh:
        fh.write(text)


def load_run(path):
    """Read back a JSON export as a RunRecord or a BenchTable."""
    with open(path) as fh:
        d = json.load(fh)
    return BenchTable.from_dict(d) if "runs" in d else RunRecord.from_dict(d)


# ---------------------------------------------------------------------------
# experiment documents
# ---------------------------------------------------------------------------

BENCH_LINEUP = ("full:cross_entropy", "single:l", "single:m", "full:l", "full:m")

DEFAULT_EXPERIMENT = {
    "dataset": {"kind": "two_moons", "n": 1000, "noise": 0.1, "seed": 3},
    "split": {"test_fraction": 0.2, "seed": 0},
    "train": TrainConfig().to_dict(),
    "losses": list(BENCH_LINEUP),
    "seeds": [0, 1, 2, 3, 4],
}


def make_dataset(d) -> Dataset:
    kind = d.get("kind", "two_moons")
    if kind == "two_moons":
        return gen_two_moons(int(d.get("n", 1000)), float(d.get("noise", 0.1)), d.get("seed", 0))
    if kind == "blobs":
        return gen_gaussian_blobs(int(d["n"]), d["centers"], float(d.get("sd", 1.0)), d.get("seed", 0))
    if kind == "csv":
        return load_csv(d["path"], d.get("label_column", -1), bool(d.get("has_header", True)))
    raise ValueError(f"unknown dataset kind {kind!r}")


def prepare_data(experiment) -> tuple:
    ds = make_dataset(experiment.get("dataset", DEFAULT_EXPERIMENT["dataset"]))
    sp = experiment.get("split", DEFAULT_EXPERIMENT["split"])
    return split(ds, float(sp.get("test_fraction", 0.2)), sp.get("seed", 0))
