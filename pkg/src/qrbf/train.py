"""Loss, analytic derivatives, and trainers for the tensor-weight model,
plus the full-weight least-squares baseline.

The loss is the mean-square objective
``L(theta) = (1/2M) sum_t (phi_t . w(theta) - r_t)^2`` where ``phi_t`` is
either the raw Gaussian feature vector of sample ``t`` or its unit-norm
feature state, selected by ``LossConfig.normalize_features`` (default:
normalized, matching the readout convention of the circuit emulator).

Gradient-descent updates fold the loss's 1/M prefactor into the learning
rate; both trainers are deterministic given the start point.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .datasets import Dataset
from .kernel import KernelModel, feature_matrix
from .tensorweight import fast_inner, materialize, shift_derivative, weight_with_derivatives

DIVERGENCE_LIMIT = 1e6
_DAMPING_CAP = 1e12


class DivergenceError(RuntimeError):
    """Raised when an optimizer's loss blows past :data:`DIVERGENCE_LIMIT`."""


@dataclass
class LossConfig:
    """Objective and optimizer knobs shared by the tensor-weight trainers."""

    normalize_features: bool = True
    learning_rate: float = 2.0
    max_iters: int = 5000
    grad_tol: float = 1e-6
    damping: float = 1e-3

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.damping < 0:
            raise ValueError("damping must be >= 0")


@dataclass
class TrainReport:
    """Outcome of one training run.

    ``theta`` holds the final parameter vector: m angles for the tensor
    methods, the full M-dimensional weight vector for ``lstsq``.
    """

    theta: np.ndarray
    loss_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    wall_time: float = 0.0
    converged: bool = False
    method: str = "gd"


def assemble_features(model: KernelModel, ds: Dataset, normalize: bool) -> np.ndarray:
    """Feature matrix of ``ds`` against the model centers (one row per sample)."""
    return feature_matrix(model, ds.x, normalize=normalize)


# --- array-level objective (labels may be any real vector here; the
#     Dataset wrappers below restrict them to +/-1) ---

def loss_at(theta, phi: np.ndarray, labels: np.ndarray) -> float:
    e = phi @ materialize(theta) - labels
    return float(e @ e) / (2.0 * phi.shape[0])


def gradient_at(theta, phi: np.ndarray, labels: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    e = phi @ materialize(theta) - labels
    v = phi.T @ e
    grad = np.array([fast_inner(shift_derivative(theta, j), v) for j in range(theta.size)])
    return grad / phi.shape[0]


def hessian_at(theta, phi: np.ndarray, labels: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    m = theta.size
    rows = weight_with_derivatives(theta)
    e = phi @ rows[0] - labels
    v = phi.T @ e
    d = phi @ rows[1:].T  # (M, m): per-sample first-derivative responses
    hess = d.T @ d
    for j in range(m):
        for k in range(j, m):
            curv = fast_inner(shift_derivative(shift_derivative(theta, j), k), v)
            hess[j, k] += curv
            if k != j:
                hess[k, j] += curv
    return hess / phi.shape[0]


def _check_shapes(theta, model: KernelModel, ds: Dataset):
    theta = np.asarray(theta, dtype=float)
    if 2 ** theta.size != model.size:
        raise ValueError(
            f"theta has {theta.size} factors but the model has {model.size} centers "
            f"(expected 2**m)")
    if ds.dim != model.dim:
        raise ValueError("dataset dimension does not match model centers")
    return theta


def loss(theta, model: KernelModel, ds: Dataset, cfg: LossConfig) -> float:
    theta = _check_shapes(theta, model, ds)
    phi = assemble_features(model, ds, cfg.normalize_features)
    return loss_at(theta, phi, ds.labels.astype(float))


def gradient(theta, model: KernelModel, ds: Dataset, cfg: LossConfig) -> np.ndarray:
    theta = _check_shapes(theta, model, ds)
    phi = assemble_features(model, ds, cfg.normalize_features)
    return gradient_at(theta, phi, ds.labels.astype(float))


def hessian(theta, model: KernelModel, ds: Dataset, cfg: LossConfig) -> np.ndarray:
    theta = _check_shapes(theta, model, ds)
    phi = assemble_features(model, ds, cfg.normalize_features)
    return hessian_at(theta, phi, ds.labels.astype(float))


def train_gd(model: KernelModel, ds: Dataset, cfg: LossConfig, theta0) -> TrainReport:
    """Full-batch gradient descent: theta <- theta - lr * grad L."""
    theta = _check_shapes(theta0, model, ds).copy()
    phi = assemble_features(model, ds, cfg.normalize_features)
    labels = ds.labels.astype(float)
    trace: list[float] = []
    converged = False
    steps = 0
    t0 = time.perf_counter()
    for it in range(cfg.max_iters + 1):
        current = loss_at(theta, phi, labels)
        trace.append(current)
        if current > DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"gd diverged: loss {current:.3g} exceeded {DIVERGENCE_LIMIT:.0e} "
                f"after {steps} steps (learning rate too large?)")
        grad = gradient_at(theta, phi, labels)
        if float(np.linalg.norm(grad)) <= cfg.grad_tol:
            converged = True
            break
        if it == cfg.max_iters:
            break
        theta -= cfg.learning_rate * grad
        steps = it + 1
    return TrainReport(theta=theta, loss_trace=trace, iterations=steps,
                       wall_time=time.perf_counter() - t0, converged=converged, method="gd")


def _levenberg_step(theta, current, grad, hess, lam, loss_fn):
    """One damped-Newton proposal loop: returns (new_theta, new_lam, accepted).

    Solves (H + lam I) delta = -grad; on loss decrease the step is accepted
    and lam halves, otherwise lam grows 4x and the proposal is retried until
    the damping cap, at which point the step is reported as not accepted.
    """
    eye = np.eye(theta.size)
    while lam <= _DAMPING_CAP:
        try:
            delta = np.linalg.solve(hess + lam * eye, -grad)
        except np.linalg.LinAlgError:
            lam = max(lam * 4.0, 1e-8)
            continue
        trial = theta + delta
        trial_loss = loss_fn(trial)
        if np.isfinite(trial_loss) and trial_loss < current:
            return trial, lam * 0.5, True
        lam = max(lam * 4.0, 1e-8)
    return theta, lam, False


def train_newton(model: KernelModel, ds: Dataset, cfg: LossConfig, theta0) -> TrainReport:
    """Damped Newton (Levenberg-style adaptive damping), same stopping rule as gd."""
    theta = _check_shapes(theta0, model, ds).copy()
    phi = assemble_features(model, ds, cfg.normalize_features)
    labels = ds.labels.astype(float)
    lam = cfg.damping
    trace: list[float] = []
    converged = False
    steps = 0
    t0 = time.perf_counter()
    for it in range(cfg.max_iters + 1):
        current = loss_at(theta, phi, labels)
        trace.append(current)
        if current > DIVERGENCE_LIMIT:
            raise DivergenceError(f"newton diverged: loss {current:.3g} after {steps} steps")
        grad = gradient_at(theta, phi, labels)
        if float(np.linalg.norm(grad)) <= cfg.grad_tol:
            converged = True
            break
        if it == cfg.max_iters:
            break
        hess = hessian_at(theta, phi, labels)
        theta, lam, accepted = _levenberg_step(
            theta, current, grad, hess, lam, lambda t: loss_at(t, phi, labels))
        if not accepted:
            raise RuntimeError(
                f"newton stalled: no loss decrease up to damping {_DAMPING_CAP:.0e} "
                f"after {steps} steps (gradient norm {np.linalg.norm(grad):.3g})")
        steps = it + 1
    return TrainReport(theta=theta, loss_trace=trace, iterations=steps,
                       wall_time=time.perf_counter() - t0, converged=converged, method="newton")


def train_full_lstsq(model: KernelModel, ds: Dataset, ridge: float = 1e-10) -> np.ndarray:
    """Full-weight baseline: min_w sum_t (f(x_t).w - r_t)^2 on raw features.

    With centers = samples the feature matrix is the symmetric Gram matrix K,
    so the ridge-regularized normal equations read (K^2 + ridge I) w = K r.
    """
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    if model.size != ds.size:
        raise ValueError("least-squares baseline requires centers = training samples")
    k = model.gram
    r = ds.labels.astype(float)
    b = k @ r
    lhs = k @ k
    diag = np.arange(model.size)
    for attempt_ridge in (ridge, max(ridge, 1e-10) * 1e4):
        a = lhs.copy()
        a[diag, diag] += attempt_ridge
        try:
            w = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            continue
        if np.isfinite(w).all():
            return w
    raise RuntimeError("normal equations remained singular beyond ridge rescue")


def predict_tensor(theta, model: KernelModel, x: np.ndarray, normalize: bool = True) -> np.ndarray:
    """Network outputs phi(x) . w(theta) for a batch of inputs."""
    phi = feature_matrix(model, np.asarray(x, dtype=float), normalize=normalize)
    return phi @ materialize(theta)


def predict_full(w, model: KernelModel, x: np.ndarray) -> np.ndarray:
    """Baseline outputs f(x) . w on raw features."""
    phi = feature_matrix(model, np.asarray(x, dtype=float), normalize=False)
    return phi @ np.asarray(w, dtype=float)
