"""Experiment harness: benchmark runs, metric computation, sweeps over the
parameter count, decision-grid export, and report files.

Metrics follow the correct-prediction-ratio convention
``RCP = 1 - (1/4M) sum_t (sign(pred_t) - r_t)^2`` with sign(0) := +1; MSE is
the mean-square training objective ``(1/2M) sum_t (pred_t - r_t)^2``; INF is
RCP evaluated on a freshly generated test set of the same pattern (same
spec, shifted seed).

Report files are byte-reproducible for identical configurations; wall-clock
seconds are therefore written to a separate ``timings.txt`` sidecar that is
excluded from that guarantee.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import svm
from .datasets import Dataset, PatternSpec, generate
from .kernel import KernelModel, build_kernel_model
from .tensorweight import num_factors
from .train import (LossConfig, TrainReport, train_full_lstsq, train_gd,
                    train_newton, predict_full, predict_tensor)

METHODS = ("tensor-gd", "tensor-newton", "full-lstsq", "svm-dual", "svm-tensor")

# fresh INF test sets reuse the pattern spec with this seed offset
INF_SEED_OFFSET = 1_000_003


@dataclass(frozen=True)
class Metrics:
    rcp: float
    mse: float
    inf: float
    seconds: float


@dataclass
class ExperimentConfig:
    pattern: PatternSpec
    method: str = "tensor-gd"
    loss: LossConfig = field(default_factory=LossConfig)
    seeds: tuple[int, ...] = (0,)
    ridge: float = 1e-10
    svm_iters: int = 5000
    svm_step: float | None = None
    svm_tensor: svm.TensorSvmConfig = field(default_factory=svm.TensorSvmConfig)
    kernel_trick: bool = False
    outdir: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.seeds:
            raise ValueError("need at least one seed")


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    per_seed: dict[int, Metrics] = field(default_factory=dict)
    train_reports: dict[int, TrainReport] = field(default_factory=dict)
    errors: dict[int, str] = field(default_factory=dict)

    @property
    def mean(self) -> Metrics | None:
        if not self.per_seed:
            return None
        rows = list(self.per_seed.values())
        return Metrics(rcp=float(np.mean([r.rcp for r in rows])),
                       mse=float(np.mean([r.mse for r in rows])),
                       inf=float(np.mean([r.inf for r in rows])),
                       seconds=float(np.mean([r.seconds for r in rows])))


def rcp_score(predictions, labels) -> float:
    predictions = np.asarray(predictions, dtype=float)
    labels = np.asarray(labels, dtype=float)
    signs = np.where(predictions >= 0, 1.0, -1.0)
    return 1.0 - float(np.sum((signs - labels) ** 2)) / (4.0 * labels.size)


def mse_score(predictions, labels) -> float:
    predictions = np.asarray(predictions, dtype=float)
    labels = np.asarray(labels, dtype=float)
    return float(np.sum((predictions - labels) ** 2)) / (2.0 * labels.size)


def initial_theta(seed: int, m: int) -> np.ndarray:
    """Uniform random start in [0, 2 pi) per seed (degenerate theta=0 is a
    stationary trap on symmetric data)."""
    return np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, m)


def _run_seed(cfg: ExperimentConfig, seed: int):
    """Train one seed; returns (Metrics, TrainReport-or-None)."""
    train_ds = generate(replace(cfg.pattern, seed=seed))
    test_ds = generate(replace(cfg.pattern, seed=seed + INF_SEED_OFFSET))
    t0 = time.perf_counter()
    model = build_kernel_model(train_ds)
    report = None

    if cfg.method in ("tensor-gd", "tensor-newton"):
        theta0 = initial_theta(seed, num_factors(train_ds.size))
        trainer = train_gd if cfg.method == "tensor-gd" else train_newton
        report = trainer(model, train_ds, cfg.loss, theta0)
        norm = cfg.loss.normalize_features
        train_pred = predict_tensor(report.theta, model, train_ds.x, normalize=norm)
        test_pred = predict_tensor(report.theta, model, test_ds.x, normalize=norm)
    elif cfg.method == "full-lstsq":
        w = train_full_lstsq(model, train_ds, cfg.ridge)
        train_pred = predict_full(w, model, train_ds.x)
        test_pred = predict_full(w, model, test_ds.x)
        report = TrainReport(theta=w, loss_trace=[mse_score(train_pred, train_ds.labels)],
                             iterations=1, wall_time=0.0, converged=True, method="lstsq")
    elif cfg.method == "svm-dual":
        sol = svm.solve_dual(model, train_ds.labels, iters=cfg.svm_iters,
                             step=cfg.svm_step, kernel_trick=cfg.kernel_trick)
        train_pred = svm.decision_values(train_ds.x, sol, model)
        test_pred = svm.decision_values(test_ds.x, sol, model)
    else:  # svm-tensor
        tcfg = replace(cfg.svm_tensor, seed=seed, kernel_trick=cfg.kernel_trick)
        sol = svm.solve_tensor_svm(model, train_ds.labels, tcfg)
        train_pred = svm.decision_values(train_ds.x, sol, model)
        test_pred = svm.decision_values(test_ds.x, sol, model)
        report = TrainReport(theta=sol.theta, loss_trace=list(sol.objective_trace),
                             iterations=len(sol.objective_trace) - 1, wall_time=0.0,
                             converged=True, method="svm-tensor")

    seconds = time.perf_counter() - t0
    metrics = Metrics(rcp=rcp_score(train_pred, train_ds.labels),
                      mse=mse_score(train_pred, train_ds.labels),
                      inf=rcp_score(test_pred, test_ds.labels),
                      seconds=seconds)
    return metrics, report


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Train and score every seed; per-seed failures are recorded and the
    remaining seeds still run.  Writes report files when ``outdir`` is set."""
    out = ExperimentReport(config=cfg)
    for seed in cfg.seeds:
        try:
            metrics, report = _run_seed(cfg, seed)
        except Exception as exc:  # noqa: BLE001 - per-seed isolation is the contract
            out.errors[seed] = f"{type(exc).__name__}: {exc}"
            continue
        out.per_seed[seed] = metrics
        if report is not None:
            out.train_reports[seed] = report
    if cfg.outdir:
        write_report_files(out, cfg.outdir)
    return out


def sweep_m(cfg: ExperimentConfig, m_range) -> list[dict]:
    """One averaged metrics row per m (sample count 2**m); emits CSV when
    ``outdir`` is set."""
    rows = []
    for m in m_range:
        sub = replace(cfg, pattern=replace(cfg.pattern, samples=2 ** m), outdir=None)
        rep = run_experiment(sub)
        mean = rep.mean
        if mean is None:
            raise RuntimeError(f"all seeds failed at m={m}: {rep.errors}")
        rows.append({"m": m, "samples": 2 ** m, "rcp": mean.rcp,
                     "mse": mean.mse, "inf": mean.inf, "seconds": mean.seconds})
    if cfg.outdir:
        os.makedirs(cfg.outdir, exist_ok=True)
        with open(os.path.join(cfg.outdir, "metrics.csv"), "w", encoding="ascii") as fh:
            fh.write("m,samples,rcp,mse,inf\n")
            for row in rows:
                fh.write(f"{row['m']},{row['samples']},{row['rcp']:.17g},"
                         f"{row['mse']:.17g},{row['inf']:.17g}\n")
    return rows


def export_decision_grid(solution, model: KernelModel, bounds, resolution: int,
                         path=None, normalize: bool = True) -> np.ndarray:
    """Uniform (x1, x2, decision_value) grid over ``bounds`` = (x1_min,
    x1_max, x2_min, x2_max); exactly resolution**2 rows, x1-major order.

    ``solution`` may be a TrainReport (tensor theta or full weights), an SVM
    solution, or any callable mapping an (K, 2) batch to values.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    x1_min, x1_max, x2_min, x2_max = map(float, bounds)
    if not (x1_min < x1_max and x2_min < x2_max):
        raise ValueError("degenerate bounds")
    predict = _as_predictor(solution, model, normalize)
    xs = np.linspace(x1_min, x1_max, resolution)
    ys = np.linspace(x2_min, x2_max, resolution)
    pts = np.array([(a, b) for a in xs for b in ys])
    values = predict(pts)
    grid = np.column_stack((pts, values))
    if path is not None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("x1,x2,value\n")
            for a, b, v in grid:
                fh.write(f"{a:.17g},{b:.17g},{v:.17g}\n")
    return grid


def _as_predictor(solution, model: KernelModel, normalize: bool):
    if callable(solution):
        return solution
    if isinstance(solution, (svm.DualSolution, svm.TensorSvmSolution)):
        return lambda pts: svm.decision_values(pts, solution, model)
    if isinstance(solution, TrainReport):
        if solution.method == "lstsq":
            return lambda pts: predict_full(solution.theta, model, pts)
        return lambda pts: predict_tensor(solution.theta, model, pts, normalize=normalize)
    raise TypeError(f"cannot derive a predictor from {type(solution).__name__}")


# ---------------------------------------------------------------------------
# report files
# ---------------------------------------------------------------------------

def _config_lines(cfg: ExperimentConfig) -> list[str]:
    p = cfg.pattern
    return [
        f"pattern = {p.family}",
        f"samples = {p.samples}",
        f"noise = {p.noise:.17g}",
        f"method = {cfg.method}",
        f"seeds = {','.join(str(s) for s in cfg.seeds)}",
        f"normalize_features = {cfg.loss.normalize_features}",
        f"learning_rate = {cfg.loss.learning_rate:.17g}",
        f"max_iters = {cfg.loss.max_iters}",
        f"grad_tol = {cfg.loss.grad_tol:.17g}",
        f"damping = {cfg.loss.damping:.17g}",
        f"ridge = {cfg.ridge:.17g}",
        f"kernel_trick = {cfg.kernel_trick}",
    ]


def write_report_files(report: ExperimentReport, outdir) -> None:
    """report.txt, metrics.csv, loss_trace.csv, theta.txt (reproducible) and
    timings.txt (volatile)."""
    os.makedirs(outdir, exist_ok=True)
    cfg = report.config

    lines = ["[config]"] + _config_lines(cfg) + ["", "[metrics]"]
    lines.append("seed rcp mse inf")
    for seed in cfg.seeds:
        if seed in report.per_seed:
            m = report.per_seed[seed]
            lines.append(f"{seed} {m.rcp:.17g} {m.mse:.17g} {m.inf:.17g}")
        else:
            lines.append(f"{seed} ERROR: {report.errors[seed]}")
    mean = report.mean
    if mean is not None:
        lines += ["", f"mean rcp = {mean.rcp:.17g}", f"mean mse = {mean.mse:.17g}",
                  f"mean inf = {mean.inf:.17g}"]
    with open(os.path.join(outdir, "report.txt"), "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")

    with open(os.path.join(outdir, "metrics.csv"), "w", encoding="ascii") as fh:
        fh.write("seed,rcp,mse,inf\n")
        for seed, m in report.per_seed.items():
            fh.write(f"{seed},{m.rcp:.17g},{m.mse:.17g},{m.inf:.17g}\n")
        if mean is not None:
            fh.write(f"mean,{mean.rcp:.17g},{mean.mse:.17g},{mean.inf:.17g}\n")

    with open(os.path.join(outdir, "loss_trace.csv"), "w", encoding="ascii") as fh:
        fh.write("seed,iteration,loss\n")
        for seed, tr in report.train_reports.items():
            for i, value in enumerate(tr.loss_trace):
                fh.write(f"{seed},{i},{value:.17g}\n")

    with open(os.path.join(outdir, "theta.txt"), "w", encoding="ascii") as fh:
        for seed, tr in report.train_reports.items():
            values = ",".join(format(v, ".17g") for v in np.atleast_1d(tr.theta))
            fh.write(f"{seed},{values}\n")

    with open(os.path.join(outdir, "timings.txt"), "w", encoding="ascii") as fh:
        fh.write("# wall-clock seconds per seed (not byte-reproducible)\n")
        for seed, m in report.per_seed.items():
            fh.write(f"{seed} {m.seconds:.6f}\n")
