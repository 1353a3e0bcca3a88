import csv
import json

import numpy as np
import pytest

from losslab import optim
from losslab.data import gen_gaussian_blobs, gen_two_moons, split
from losslab.errors import ShapeMismatch
from losslab.harness import (
    CURVE_COLUMNS,
    BENCH_LINEUP,
    BenchTable,
    RunRecord,
    TrainConfig,
    batch_schedule,
    bench_losses,
    curves_csv,
    export_run,
    initial_network,
    load_run,
    train,
)
from losslab.losses import LossSpec


@pytest.fixture(scope="module")
def small_moons():
    return split(gen_two_moons(200, 0.1, seed=3), 0.25, seed=0)


def quick(**kw):
    base = dict(layer_sizes=[2, 8, 2], epochs=5, batch_size=16)
    base.update(kw)
    return TrainConfig(**base)


def test_config_round_trip():
    cfg = TrainConfig(loss=LossSpec("two_param_l", alpha=2, beta=0.5), steps_per_epoch=100, seed=9)
    again = TrainConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    assert TrainConfig.from_dict({"loss": "single:m", "epochs": 3}).loss == LossSpec("m", "single")
    with pytest.raises(ValueError):
        TrainConfig.from_dict({"epoch": 3})


def test_epochs_validation(small_moons):
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    rec = train(quick(epochs=1), *small_moons)
    assert len(rec.train_loss) == len(rec.train_acc) == len(rec.test_acc) == 1


def test_curves_and_accuracy_ranges(small_moons):
    rec = train(quick(epochs=4), *small_moons)
    assert len(rec.train_loss) == 4 and len(rec.grad_norm_max) == 4
    assert all(0 <= a <= 1 for a in rec.train_acc + rec.test_acc)
    assert rec.final_test_acc == rec.test_acc[-1]
    assert rec.converged


def test_train_deterministic(small_moons):
    a = train(quick(seed=4), *small_moons)
    b = train(quick(seed=4), *small_moons)
    for key in ("train_loss", "train_acc", "test_acc", "grad_norm_mean", "grad_norm_max"):
        assert getattr(a, key) == getattr(b, key)
    c = train(quick(seed=5), *small_moons)
    assert c.train_loss != a.train_loss


def test_only_the_loss_differs_across_cells():
    a, b = TrainConfig(loss=LossSpec("ce"), seed=2), TrainConfig(loss=LossSpec("tan"), seed=2)
    for p, q in zip(initial_network(a).params(), initial_network(b).params()):
        np.testing.assert_array_equal(p, q)
    sa, sb = batch_schedule(a, 50), batch_schedule(b, 50)
    for _ in range(3):
        for i, j in zip(next(sa), next(sb)):
            np.testing.assert_array_equal(i, j)


def test_full_pass_epochs_cover_data():
    cfg = TrainConfig(batch_size=16)
    epoch = next(batch_schedule(cfg, 50))
    assert len(epoch) == 4  # ceil(50 / 16)
    assert sorted(np.concatenate(epoch)) == list(range(50))


def test_fixed_step_epochs_wrap_around():
    cfg = TrainConfig(batch_size=16, steps_per_epoch=7)
    sched = batch_schedule(cfg, 50)
    first, second = next(sched), next(sched)
    assert len(first) == len(second) == 7
    assert all(len(b) == 16 for b in first + second)
    # the first 48 draws are one permutation, then the stream wraps
    flat = np.concatenate(first)
    assert len(set(flat[:48])) == 48


def test_fixed_step_training(small_moons):
    rec = train(quick(steps_per_epoch=3), *small_moons)
    assert len(rec.train_loss) == 5


def test_shape_mismatch(small_moons):
    with pytest.raises(ShapeMismatch):
        train(quick(layer_sizes=[3, 4, 2]), *small_moons)
    with pytest.raises(ShapeMismatch):
        train(quick(layer_sizes=[2, 4, 3]), *small_moons)
    with pytest.raises(ValueError):
        train(quick(batch_size=10_000), *small_moons)


def test_sigmoid_head_training(small_moons):
    rec = train(quick(layer_sizes=[2, 8, 1], epochs=30, loss=LossSpec("l")), *small_moons)
    assert rec.final_train_acc > 0.8


def test_divergence_recorded(small_moons, tmp_path):
    cfg = quick(optimizer=optim.sgd(1e300), hidden_activation="relu", epochs=5)
    rec = train(cfg, *small_moons)
    assert not rec.converged
    assert rec.diverged_epoch == 1
    assert rec.train_loss == []
    export_run(rec, "csv", tmp_path / "d.csv")
    rows = list(csv.DictReader(open(tmp_path / "d.csv")))
    assert rows[-1]["epoch"] == "1" and rows[-1]["train_loss"] == "nan"
    export_run(rec, "json", tmp_path / "d.json")
    assert json.loads((tmp_path / "d.json").read_text())["diverged_epoch"] == 1


def test_diverged_cell_does_not_stop_bench(small_moons):
    table = bench_losses(["ce"], quick(optimizer=optim.sgd(1e300), hidden_activation="relu"), *small_moons, seeds=[0, 1])
    assert not table.all_converged
    assert table.summary()[0]["n_diverged"] == 2


def test_moons_regression_floor():
    tr, te = split(gen_two_moons(1000, 0.1, seed=3), 0.2, seed=0)
    rec = train(TrainConfig(loss=LossSpec("ce"), epochs=200, batch_size=32, seed=0), tr, te)
    assert rec.final_test_acc >= 0.95


def test_moons_need_a_hidden_layer():
    ds = gen_two_moons(1000, 0.1, seed=3)
    linear = train(TrainConfig(layer_sizes=[2, 2], epochs=100), ds, ds)
    mlp = train(TrainConfig(layer_sizes=[2, 16, 16, 2], epochs=100), ds, ds)
    assert linear.final_train_acc < 0.95 < mlp.final_train_acc


def test_blobs_easy():
    tr, te = split(gen_gaussian_blobs(200, [[0, 0], [10, 0]], 1.0, seed=5), 0.25, seed=0)
    rec = train(TrainConfig(layer_sizes=[2, 8, 2], epochs=100), tr, te)
    assert rec.final_test_acc > 0.99


def test_bench_single_cell(small_moons):
    table = bench_losses([LossSpec("m")], quick(), *small_moons, seeds=[3])
    assert len(table.records) == 1
    direct = train(quick(loss=LossSpec("m"), seed=3), *small_moons)
    assert table.records[0].train_loss == direct.train_loss


def test_bench_duplicates_identical(small_moons):
    table = bench_losses(["full:m", "full:m"], quick(), *small_moons, seeds=[0, 1])
    for j in range(2):
        assert table.cell(0, j).train_loss == table.cell(1, j).train_loss
    assert table.cell(0, 0).run_id != table.cell(1, 0).run_id


def test_bench_ordering_and_summary(small_moons):
    table = bench_losses(list(BENCH_LINEUP), quick(), *small_moons, seeds=[0, 1])
    assert [r.loss_name for r in table.records[::2]] == [LossSpec.parse(s).name for s in BENCH_LINEUP]
    assert [r.config.seed for r in table.records[:2]] == [0, 1]
    summary = table.summary()
    assert sorted(r["rank"] for r in summary) == [1, 2, 3, 4, 5]
    means = [r["mean_test_acc"] for r in summary]
    assert means == sorted(means, reverse=True)
    with pytest.raises(ValueError):
        bench_losses([], quick(), *small_moons, seeds=[0])


def test_bench_parallel_matches_serial(small_moons):
    serial = bench_losses(["ce", "tan"], quick(epochs=2), *small_moons, seeds=[0, 1])
    parallel = bench_losses(["ce", "tan"], quick(epochs=2), *small_moons, seeds=[0, 1], workers=2)
    assert curves_csv(serial) == curves_csv(parallel)


def test_export_csv_row_count(small_moons, tmp_path):
    table = bench_losses(list(BENCH_LINEUP), quick(epochs=50), *small_moons, seeds=[0])
    path = tmp_path / "curves.csv"
    export_run(table, "csv", path)
    rows = list(csv.reader(open(path)))
    assert tuple(rows[0]) == CURVE_COLUMNS
    assert len(rows) - 1 == 250


def test_export_json_round_trip(small_moons, tmp_path):
    rec = train(quick(), *small_moons)
    export_run(rec, "json", tmp_path / "r.json")
    assert load_run(tmp_path / "r.json") == rec
    table = bench_losses(["m", "l"], quick(epochs=2), *small_moons, seeds=[0])
    export_run(table, "json", tmp_path / "t.json")
    back = load_run(tmp_path / "t.json")
    assert isinstance(back, BenchTable)
    assert back.records == table.records and back.losses == table.losses
    with pytest.raises(ValueError):
        export_run(rec, "xml", tmp_path / "r.xml")


def test_record_from_dict_rejects_unknown(small_moons):
    rec = train(quick(epochs=1), *small_moons)
    d = rec.to_dict()
    d["extra"] = 1
    with pytest.raises(TypeError):
        RunRecord.from_dict(d)
