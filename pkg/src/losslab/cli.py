"""``losslab`` command line.

Exit codes: 0 success, 1 a property check or bench cell failed, 2 usage error.
Machine-readable results go to stdout or files, human summaries to stderr.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .errors import LossLabError
from .losses import (
    LossSpec,
    catalogue,
    compare_strictness,
    curve_to_csv,
    eval_loss,
    export_loss_curve,
    grad_loss,
    probe_properties,
)


class UsageError(Exception):
    pass


def _err(*args):
    print(*args, file=sys.stderr)


def _add_loss_flags(p, required=True):
    p.add_argument("--loss", required=required, help="loss family, e.g. m, l, tan, sec, param_m, two_param_l")
    p.add_argument("--variant", default="full", choices=["single", "full"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--eps", type=float, default=None, help="prediction clamp (default 1e-7)")


def _spec_from_flags(args) -> LossSpec:
    kwargs = {}
    if args.eps is not None:
        kwargs["eps_clamp"] = args.eps
    # a full spec string is accepted too, e.g. --loss two_param_l:alpha=2,beta=0.5
    if ":" in args.loss or "=" in args.loss:
        spec = LossSpec.parse(args.loss)
        return LossSpec(
            spec.family,
            spec.variant if args.variant == "full" else args.variant,
            alpha=args.alpha if args.alpha is not None else spec.alpha,
            beta=args.beta if args.beta is not None else spec.beta,
            eps_clamp=kwargs.get("eps_clamp", spec.eps_clamp),
        )
    return LossSpec(args.loss, args.variant, alpha=args.alpha, beta=args.beta, **kwargs)


def cmd_eval(args) -> int:
    spec = _spec_from_flags(args)
    print(f"loss {eval_loss(spec, args.y, args.yhat)!r}")
    print(f"grad {grad_loss(spec, args.y, args.yhat)!r}")
    return 0


def cmd_verify(args) -> int:
    if args.all:
        specs = catalogue()
    elif args.loss:
        specs = [_spec_from_flags(args)]
    else:
        raise UsageError("verify needs --loss or --all")
    reports = [probe_properties(s, grid_size=args.grid) for s in specs]
    json.dump([r.to_dict() for r in reports], sys.stdout, indent=1)
    sys.stdout.write("\n")
    for rep in reports:
        _err(f"{rep.spec.name}: {'PASS' if rep.passed else 'FAIL'}")
        for res in rep.results.values():
            _err(f"  {res.name:<15} {'pass' if res.passed else 'FAIL'}  {res.detail}")
            for w in res.witnesses:
                _err(f"      witness y={w[0]} y_hat={w[1]!r} value={w[2]!r}")
    return 0 if all(r.passed for r in reports) else 1


def cmd_compare(args) -> int:
    l1, l2 = LossSpec.parse(args.loss1), LossSpec.parse(args.loss2)
    eps = max(l1.eps_clamp, l2.eps_clamp)
    lo = eps if args.lo is None else args.lo
    hi = 1.0 - eps if args.hi is None else args.hi
    grid = np.linspace(lo, hi, args.grid)
    targets = (0, 1) if args.y is None else (args.y,)
    rep = compare_strictness(l1, l2, grid, targets)
    json.dump(rep.to_dict(), sys.stdout, indent=1)
    sys.stdout.write("\n")
    _err(f"signed gradients:    {rep.literal.verdict.value}")
    _err(f"gradient magnitudes: {rep.magnitude.verdict.value}")
    return 0


def cmd_curve(args) -> int:
    spec = _spec_from_flags(args)
    text = curve_to_csv(export_loss_curve(spec, args.y, args.points))
    if args.out:
        Path(args.out).write_text(text)
        _err(f"wrote {args.points} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _load_experiment(path):
    exp = copy.deepcopy(harness.DEFAULT_EXPERIMENT)
    if path is None:
        return exp
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    exp.update(doc)
    return exp


def _apply_overrides(exp, args):
    tr = dict(exp["train"])
    opt = dict(tr.get("optimizer", {}))
    if args.lr is not None:
        opt["learning_rate"] = args.lr
    if args.optimizer is not None:
        opt["kind"] = args.optimizer
    tr["optimizer"] = opt
    for flag, key in (("epochs", "epochs"), ("batch_size", "batch_size"), ("steps_per_epoch", "steps_per_epoch")):
        value = getattr(args, flag)
        if value is not None:
            tr[key] = value
    if args.seed is not None:
        tr["seed"] = args.seed
        exp["seeds"] = [args.seed]
    if getattr(args, "seeds", None) is not None:
        exp["seeds"] = args.seeds
    if args.loss:
        exp["losses"] = list(args.loss)
        tr["loss"] = args.loss[0]
    exp["train"] = tr
    return exp


def _write_outputs(table, out):
    if out is None:
        return
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    harness.export_run(table, "csv", out / "curves.csv")
    harness.export_run(table, "json", out / "runs.json")
    (out / "summary.csv").write_text(harness.summary_csv(table))
    _err(f"wrote curves.csv, runs.json, summary.csv to {out}")


def _run_bench(args, single: bool) -> int:
    exp = _apply_overrides(_load_experiment(args.config), args)
    base = harness.TrainConfig.from_dict(exp["train"])
    train_ds, test_ds = harness.prepare_data(exp)
    if single:
        losses, seeds = [base.loss], [base.seed]
    else:
        losses, seeds = exp["losses"], exp["seeds"]
    if args.save_config:
        exp["train"] = base.to_dict()
        Path(args.save_config).write_text(json.dumps(exp, indent=1))
    table = harness.bench_losses(losses, base, train_ds, test_ds, seeds, workers=getattr(args, "workers", 1))
    _write_outputs(table, args.out)
    sys.stdout.write(harness.summary_csv(table))
    for row in table.summary():
        _err(
            f"#{row['rank']} {row['loss_name']:<28} test {row['mean_test_acc']:.4f} "
            f"[{row['min_test_acc']:.4f}, {row['max_test_acc']:.4f}]  diverged {row['n_diverged']}"
        )
    return 0 if table.all_converged else 1


def cmd_train(args) -> int:
    return _run_bench(args, single=True)


def cmd_bench(args) -> int:
    return _run_bench(args, single=False)


def _add_train_flags(p):
    p.add_argument("--config", help="experiment JSON (dataset, split, train, losses, seeds)")
    p.add_argument("--loss", action="append", help="loss spec string; repeat for several losses")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--steps-per-epoch", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--optimizer", choices=["sgd", "adam"])
    p.add_argument("--out", help="directory for curves.csv, runs.json and summary.csv")
    p.add_argument("--save-config", help="write the resolved experiment JSON here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="losslab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="loss value and derivative at one point")
    _add_loss_flags(p)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--yhat", type=float, required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="probe the loss axioms numerically")
    _add_loss_flags(p, required=False)
    p.add_argument("--all", action="store_true", help="every catalogue loss at default parameters")
    p.add_argument("--grid", type=int, default=1024)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="strictness ordering of two losses")
    p.add_argument("--loss1", required=True)
    p.add_argument("--loss2", required=True)
    p.add_argument("--grid", type=int, default=1024)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--y", type=int, choices=[0, 1])
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("curve", help="sampled loss curve as CSV")
    _add_loss_flags(p)
    p.add_argument("--y", type=int, required=True, choices=[0, 1])
    p.add_argument("--points", type=int, default=1001)
    p.add_argument("--out")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("train", help="train one network")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bench", help="train every (loss, seed) cell and rank the losses")
    _add_train_flags(p)
    p.add_argument("--seeds", type=lambda s: [int(v) for v in s.split(",")])
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seeds", None) is not None and args.seed is not None:
        parser.error("--seed and --seeds are mutually exclusive")
    try:
        return args.func(args)
    except (UsageError, LossLabError, ValueError, KeyError) as exc:
        _err(f"losslab {args.command}: error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
