"""Command-line experiment harness.

Subcommands: ``gen`` (write a synthetic corpus), ``train`` (fit one method
and write report files), ``eval`` (score saved parameters on a dataset),
``sweep`` (metrics vs. parameter count), ``grid`` (decision-value grid
export), ``compare`` (side-by-side method table).  ``--config FILE`` reads
plain ``key = value`` lines whose entries override the given flags.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import svm
from .datasets import Dataset, PatternSpec, generate, load_csv, save_csv
from .experiments import (ExperimentConfig, Metrics, export_decision_grid, mse_score,
                          rcp_score, run_experiment, sweep_m, initial_theta)
from .kernel import build_kernel_model
from .tensorweight import num_factors
from .train import LossConfig, predict_full, predict_tensor


def _parse_seeds(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip() != "")


def _parse_range(text: str) -> range:
    lo, _, hi = text.partition(":")
    return range(int(lo), int(hi) + 1)


def _add_pattern_flags(p: argparse.ArgumentParser):
    p.add_argument("--pattern", default="blobs",
                   choices=["blobs", "annulus", "xor-quadrants", "checkerboard"])
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)


def _add_train_flags(p: argparse.ArgumentParser):
    p.add_argument("--method", default="tensor-gd",
                   choices=["tensor-gd", "tensor-newton", "full-lstsq", "svm-dual", "svm-tensor"])
    p.add_argument("--seeds", type=_parse_seeds, default=(0,),
                   help="comma-separated training seeds, e.g. 0,1,2")
    p.add_argument("--lr", type=float, default=LossConfig.learning_rate)
    p.add_argument("--max-iters", type=int, default=LossConfig.max_iters)
    p.add_argument("--grad-tol", type=float, default=LossConfig.grad_tol)
    p.add_argument("--damping", type=float, default=LossConfig.damping)
    p.add_argument("--raw-features", action="store_true",
                   help="use raw Gaussian features instead of unit-norm states")
    p.add_argument("--ridge", type=float, default=1e-10)
    p.add_argument("--kernel-trick", action="store_true",
                   help="SVM methods: use K = gram instead of K = gram @ gram")


def _loss_config(args) -> LossConfig:
    return LossConfig(normalize_features=not args.raw_features, learning_rate=args.lr,
                      max_iters=args.max_iters, grad_tol=args.grad_tol, damping=args.damping)


def _experiment_config(args, outdir=None) -> ExperimentConfig:
    pattern = PatternSpec(family=args.pattern, samples=args.samples,
                          noise=args.noise, seed=args.seed)
    return ExperimentConfig(pattern=pattern, method=args.method, loss=_loss_config(args),
                            seeds=args.seeds, ridge=args.ridge,
                            kernel_trick=args.kernel_trick, outdir=outdir)


def _apply_config_file(args: argparse.Namespace, path: str):
    """key = value lines override parsed flags; keys use flag spelling."""
    converters = {"samples": int, "seed": int, "max_iters": int, "resolution": int,
                  "noise": float, "lr": float, "grad_tol": float, "damping": float,
                  "ridge": float, "seeds": _parse_seeds, "m_range": _parse_range,
                  "raw_features": lambda v: v.lower() in ("1", "true", "yes"),
                  "kernel_trick": lambda v: v.lower() in ("1", "true", "yes")}
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if not hasattr(args, key):
                raise ValueError(f"{path}:{lineno}: unknown option {key!r}")
            setattr(args, key, converters.get(key, str)(value))


def _load_theta(path: str, seed: int | None) -> np.ndarray:
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if seed is None or int(fields[0]) == seed:
                return np.array([float(v) for v in fields[1:]])
    raise ValueError(f"no parameter line for seed {seed} in {path}")


def _score_line(tag: str, m: Metrics) -> str:
    return f"{tag:>14}  rcp={m.rcp:.4f}  mse={m.mse:.4g}  inf={m.inf:.4f}  time={m.seconds:.2f}s"


def cmd_gen(args) -> int:
    ds = generate(PatternSpec(family=args.pattern, samples=args.samples,
                              noise=args.noise, seed=args.seed))
    save_csv(ds, args.out)
    print(f"wrote {ds.size} samples ({args.pattern}) to {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = _experiment_config(args, outdir=args.outdir)
    report = run_experiment(cfg)
    for seed in cfg.seeds:
        if seed in report.per_seed:
            print(_score_line(f"seed {seed}", report.per_seed[seed]))
        else:
            print(f"seed {seed}: FAILED: {report.errors[seed]}", file=sys.stderr)
    mean = report.mean
    if mean is None:
        print("all seeds failed", file=sys.stderr)
        return 1
    print(_score_line("mean", mean))
    if args.outdir:
        print(f"reports written to {args.outdir}")
    return 0


def cmd_eval(args) -> int:
    train_ds = load_csv(args.train_data)
    test_ds = load_csv(args.test_data) if args.test_data else train_ds
    model = build_kernel_model(train_ds)
    theta = _load_theta(args.theta_file, args.theta_seed)
    if args.method == "full-lstsq":
        train_pred = predict_full(theta, model, train_ds.x)
        test_pred = predict_full(theta, model, test_ds.x)
    else:
        norm = not args.raw_features
        train_pred = predict_tensor(theta, model, train_ds.x, normalize=norm)
        test_pred = predict_tensor(theta, model, test_ds.x, normalize=norm)
    print(f"rcp = {rcp_score(train_pred, train_ds.labels):.6f}")
    print(f"mse = {mse_score(train_pred, train_ds.labels):.6g}")
    print(f"inf = {rcp_score(test_pred, test_ds.labels):.6f}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _experiment_config(args, outdir=args.outdir)
    rows = sweep_m(cfg, args.m_range)
    print("m samples rcp mse inf")
    for row in rows:
        print(f"{row['m']} {row['samples']} {row['rcp']:.4f} {row['mse']:.4g} {row['inf']:.4f}")
    return 0


def cmd_grid(args) -> int:
    train_ds = load_csv(args.train_data)
    model = build_kernel_model(train_ds)
    if args.method in ("svm-dual", "svm-tensor"):
        if args.method == "svm-dual":
            sol = svm.solve_dual(model, train_ds.labels, kernel_trick=args.kernel_trick)
        else:
            sol = svm.solve_tensor_svm(
                model, train_ds.labels,
                svm.TensorSvmConfig(seed=args.seed, kernel_trick=args.kernel_trick))
        predictor = sol
    else:
        theta = _load_theta(args.theta_file, args.theta_seed)
        if args.method == "full-lstsq":
            predictor = lambda pts: predict_full(theta, model, pts)
        else:
            predictor = lambda pts: predict_tensor(theta, model, pts,
                                                   normalize=not args.raw_features)
    bounds = tuple(float(v) for v in args.bounds.split(","))
    export_decision_grid(predictor, model, bounds, args.resolution, path=args.out)
    print(f"wrote {args.resolution ** 2} grid rows to {args.out}")
    return 0


def cmd_compare(args) -> int:
    """Side-by-side table over patterns and methods, Table-style."""
    rows = []
    for family in args.patterns.split(","):
        for method in args.methods.split(","):
            cfg = _experiment_config(args)
            cfg.pattern = PatternSpec(family=family, samples=args.samples,
                                      noise=args.noise, seed=args.seed)
            cfg.method = method
            report = run_experiment(cfg)
            mean = report.mean
            if mean is None:
                rows.append((family, method, None))
            else:
                rows.append((family, method, mean))
    header = f"{'pattern':>14} {'method':>14} {'time(s)':>9} {'rcp':>7} {'mse':>11} {'inf':>7}"
    print(header)
    lines = [header]
    for family, method, mean in rows:
        if mean is None:
            line = f"{family:>14} {method:>14} {'FAILED':>9}"
        else:
            line = (f"{family:>14} {method:>14} {mean.seconds:>9.2f} "
                    f"{mean.rcp:>7.4f} {mean.mse:>11.4g} {mean.inf:>7.4f}")
        print(line)
        lines.append(line)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrbf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    _add_pattern_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train one method over seeds, write reports")
    _add_pattern_flags(p)
    _add_train_flags(p)
    p.add_argument("--outdir")
    p.add_argument("--config")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score saved parameters against datasets")
    p.add_argument("--train-data", required=True)
    p.add_argument("--test-data")
    p.add_argument("--theta-file", required=True)
    p.add_argument("--theta-seed", type=int, default=None)
    p.add_argument("--method", default="tensor-gd",
                   choices=["tensor-gd", "tensor-newton", "full-lstsq"])
    p.add_argument("--raw-features", action="store_true")
    p.add_argument("--config")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="metrics vs. parameter count m")
    _add_pattern_flags(p)
    _add_train_flags(p)
    p.add_argument("--m-range", type=_parse_range, default=range(4, 9),
                   help="inclusive lo:hi, e.g. 4:10")
    p.add_argument("--outdir")
    p.add_argument("--config")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("grid", help="export a decision-value grid CSV")
    p.add_argument("--train-data", required=True)
    p.add_argument("--theta-file")
    p.add_argument("--theta-seed", type=int, default=None)
    p.add_argument("--method", default="tensor-gd",
                   choices=["tensor-gd", "tensor-newton", "full-lstsq",
                            "svm-dual", "svm-tensor"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--raw-features", action="store_true")
    p.add_argument("--kernel-trick", action="store_true")
    p.add_argument("--bounds", default="-1,1,-1,1")
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("compare", help="side-by-side method table over patterns")
    _add_pattern_flags(p)
    _add_train_flags(p)
    p.add_argument("--patterns", default="blobs,annulus",
                   help="comma-separated pattern families")
    p.add_argument("--methods", default="tensor-gd,full-lstsq")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            _apply_config_file(args, args.config)
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
