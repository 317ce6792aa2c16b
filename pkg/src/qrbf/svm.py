"""Hard-margin kernel SVM: dual objective, projected-ascent solver, decision
values, and the tensor-weight variant.

The dual kernel defaults to the explicit-feature form K = gram @ gram
(inner products of the Gaussian feature vectors themselves); pass
``kernel_trick=True`` to use K = gram directly, the conventional
Gaussian-kernel SVM.  The tensor variant swaps the M dual multipliers for a
unit-norm tensor-product weight vector with m = log2(M) angles and enforces
the dual constraints by quadratic penalties; it trades away convexity and
sparsity (its multiplier vector is dense, so no support-vector structure).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import KernelModel, feature_matrix
from .tensorweight import materialize, weight_with_derivatives
from .train import DIVERGENCE_LIMIT, DivergenceError


@dataclass(frozen=True)
class DualSolution:
    """Dual multipliers, bias, support set, and the kernel mode used."""

    w: np.ndarray
    b: float
    support_indices: np.ndarray
    labels: np.ndarray
    kernel_trick: bool
    objective_trace: tuple[float, ...]


@dataclass(frozen=True)
class TensorSvmSolution:
    theta: np.ndarray
    b: float
    mu: float
    nu: float
    labels: np.ndarray
    kernel_trick: bool
    objective_trace: tuple[float, ...]


@dataclass
class TensorSvmConfig:
    iters: int = 400
    rounds: int = 6
    step: float = 0.05
    mu: float = 10.0
    nu: float = 10.0
    escalation: float = 2.0
    seed: int = 0
    kernel_trick: bool = False


def kernel_matrix(source, kernel_trick: bool = False) -> np.ndarray:
    """Dual-problem kernel from a model (or pass a precomputed matrix through)."""
    if isinstance(source, KernelModel):
        return source.gram if kernel_trick else source.gram @ source.gram
    k = np.asarray(source, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError("kernel matrix must be square")
    return k


def dual_objective(w, kernel, labels, kernel_trick: bool = False) -> float:
    """Q(w) = sum_t w_t - (1/2) sum_st w_s w_t r_s r_t K_st."""
    w = np.asarray(w, dtype=float)
    k = kernel_matrix(kernel, kernel_trick)
    labels = np.asarray(labels, dtype=float)
    if w.shape != labels.shape or w.shape != (k.shape[0],):
        raise ValueError("w, labels, and kernel sizes disagree")
    rw = labels * w
    return float(w.sum() - 0.5 * rw @ (k @ rw))


def _project_feasible(v: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Alternating projection onto {w >= 0} and {sum w_t r_t = 0}."""
    m = labels.size
    for _ in range(200):
        v = np.maximum(v, 0.0)
        v = v - (labels @ v / m) * labels
        if v.min() >= -1e-13:
            break
    return v


def _fit_bias(decision, labels, support) -> float:
    if not support.size:
        return 0.0
    return float(np.mean(decision[support] - labels[support]))


def solve_dual(kernel, labels, iters: int = 5000, step: float | None = None,
               sv_tol: float = 1e-6, kernel_trick: bool = False) -> DualSolution:
    """Projected gradient ascent on the dual with backtracking acceptance.

    Steps that would lower Q halve the step size and are retried, so the
    accepted-iterate objective trace is non-decreasing.  The bias averages
    the margin residual over the support set.
    """
    k = kernel_matrix(kernel, kernel_trick)
    labels = np.asarray(labels, dtype=float)
    if not (np.any(labels > 0) and np.any(labels < 0)):
        raise ValueError("both classes must be present")
    m = labels.size
    kr = k * np.outer(labels, labels)
    if step is None:
        step = 1.0 / max(float(np.abs(kr).sum(axis=1).max()), 1e-12)
    w = np.zeros(m)
    trace = [dual_objective(w, k, labels)]
    for _ in range(iters):
        grad = 1.0 - kr @ w
        trial = _project_feasible(w + step * grad, labels)
        q = dual_objective(trial, k, labels)
        if q >= trace[-1] - 1e-12:
            w = trial
            trace.append(q)
            step *= 1.1
        else:
            step *= 0.5
            if step < 1e-18:
                break
    support = np.flatnonzero(w > sv_tol)
    decision = k @ (labels * w)
    b = _fit_bias(decision, labels, support)
    return DualSolution(w=w, b=b, support_indices=support, labels=labels.copy(),
                        kernel_trick=kernel_trick, objective_trace=tuple(trace))


def _cross_kernel(model: KernelModel, x: np.ndarray, kernel_trick: bool) -> np.ndarray:
    """Rows of f(x_t) . f(x) (or k(x_t, x) in trick mode) for a query batch."""
    g = feature_matrix(model, x, normalize=False)
    return g if kernel_trick else g @ model.gram


def decision_values(x, sol, model: KernelModel) -> np.ndarray:
    """Margin values sum_{t in support} w_t r_t f(x_t).f(x) - b for a batch.

    Tensor solutions use the full index set (there is no support structure)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if isinstance(sol, TensorSvmSolution):
        coeff = sol.labels * materialize(sol.theta)
        cross = _cross_kernel(model, x, sol.kernel_trick)
        return cross @ coeff - sol.b
    coeff = np.zeros(sol.w.size)
    coeff[sol.support_indices] = (sol.labels * sol.w)[sol.support_indices]
    cross = _cross_kernel(model, x, sol.kernel_trick)
    return cross @ coeff - sol.b


def decision_value(x, sol, model: KernelModel) -> float:
    return float(decision_values(np.asarray(x, dtype=float)[None, :], sol, model)[0])


def _best_threshold(decision: np.ndarray, labels: np.ndarray) -> float:
    """Bias minimizing training misclassifications along the 1-D offset axis."""
    order = np.sort(decision)
    midpoints = (order[:-1] + order[1:]) / 2.0
    candidates = np.concatenate(([order[0] - 1.0], midpoints, [order[-1] + 1.0], [0.0]))
    best_b, best_err = 0.0, None
    for b in candidates:
        signs = np.where(decision - b >= 0, 1.0, -1.0)
        err = int(np.sum(signs != labels))
        if best_err is None or err < best_err or (err == best_err and abs(b) < abs(best_b)):
            best_b, best_err = float(b), err
    return best_b


def solve_tensor_svm(model: KernelModel, labels, cfg: TensorSvmConfig | None = None) -> TensorSvmSolution:
    """Penalty-method ascent of the dual objective over tensor-product weights.

    Maximizes Q(w(theta)) - mu (sum w_t r_t)^2 - nu sum max(0, -w_t)^2 by
    gradient ascent with backtracking, escalating the penalty weights 2x per
    round; the bias is then fitted by 1-D misclassification search.
    """
    cfg = cfg or TensorSvmConfig()
    k = kernel_matrix(model, cfg.kernel_trick)
    labels = np.asarray(labels, dtype=float)
    if not (np.any(labels > 0) and np.any(labels < 0)):
        raise ValueError("both classes must be present")
    m_factors = model.size.bit_length() - 1
    if 2 ** m_factors != model.size:
        raise ValueError("tensor variant needs a power-of-two sample count")
    rng = np.random.default_rng(cfg.seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, m_factors)
    mu, nu = cfg.mu, cfg.nu

    def objective(th, mu_, nu_):
        w = materialize(th)
        rw = labels * w
        q = w.sum() - 0.5 * rw @ (k @ rw)
        return float(q - mu_ * (w @ labels) ** 2 - nu_ * np.sum(np.minimum(w, 0.0) ** 2))

    trace = [objective(theta, mu, nu)]
    for _ in range(cfg.rounds):
        step = cfg.step
        current = objective(theta, mu, nu)
        for _ in range(cfg.iters):
            rows = weight_with_derivatives(theta)
            w = rows[0]
            krw = k @ (labels * w)
            wr = w @ labels
            neg = np.minimum(w, 0.0)
            grad = np.empty(m_factors)
            for j in range(m_factors):
                dwj = rows[j + 1]
                grad[j] = (dwj.sum() - (labels * dwj) @ krw
                           - 2.0 * mu * wr * (dwj @ labels)
                           - 2.0 * nu * neg @ dwj)
            trial = theta + step * grad
            q = objective(trial, mu, nu)
            if abs(q) > DIVERGENCE_LIMIT:
                raise DivergenceError(f"tensor svm diverged: objective {q:.3g}")
            if q >= current - 1e-12:
                theta, current = trial, q
                step *= 1.05
            else:
                step *= 0.5
                if step < 1e-15:
                    break
        trace.append(current)
        mu *= cfg.escalation
        nu *= cfg.escalation

    w = materialize(theta)
    decision = k @ (labels * w)
    b = _best_threshold(decision, labels)
    return TensorSvmSolution(theta=theta, b=b, mu=mu, nu=nu, labels=labels.copy(),
                             kernel_trick=cfg.kernel_trick, objective_trace=tuple(trace))
