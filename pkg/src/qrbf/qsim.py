"""Exact state-vector emulation of the circuit formulation of the classifier.

Covers truncated coherent states whose overlaps realize the Gaussian kernel,
the indexed superposition of per-sample coherent states and its partial
trace to the kernel density operator, the tensor rotation layer, the
ancilla-assisted interference readout of the signed output, and shot-based
emulation of amplitude estimation (Bernoulli sampling of outcome
frequencies; statistical error scales as 1/sqrt(shots)).

Qubit order matches the weight-index convention of :mod:`qrbf.tensorweight`:
qubit ``j`` is bit ``j`` of the state index, least-significant first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datasets import Dataset
from .kernel import DensityOperator, KernelModel, feature_state
from .tensorweight import materialize, shift_derivative

COHERENT_CUTOFF_CAP = 200
_RHO_ELEMENT_CAP = 2 ** 24


@dataclass(frozen=True)
class QubitState:
    """Amplitude vector over q qubits (length 2**q), unit Euclidean norm."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if amps.dtype.kind not in "fc":
            amps = amps.astype(float)
        if amps.ndim != 1 or amps.size < 2 or amps.size & (amps.size - 1):
            raise ValueError("amplitude vector length must be a power of two >= 2")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state norm {norm} is not 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1


@dataclass(frozen=True)
class TruncatedCoherentState:
    """Normalized Fock-basis amplitudes (r/sigma)^k / sqrt(k!) up to a cutoff."""

    r: float
    sigma: float
    amplitudes: np.ndarray

    @property
    def r_over_sigma(self) -> float:
        return self.r / self.sigma

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class ReadoutResult:
    """Interference-readout outcome.

    ``p_plus``/``p_minus`` are the probabilities of the two informative
    basis states; ``estimate`` is the recovered signed inner product;
    ``shots`` is the sample count, or None for exact amplitudes.
    """

    p_plus: float
    p_minus: float
    estimate: float
    shots: int | None


def coherent_cutoff(ratio: float, eps: float) -> int:
    """Smallest N >= 1 whose truncation-error bound
    ``ratio**(2N) / N! * exp(ratio**2)`` is at most ``eps``."""
    ratio = abs(ratio)
    if ratio == 0.0:
        return 1
    log_eps = math.log(eps)
    for n in range(1, COHERENT_CUTOFF_CAP + 1):
        log_bound = 2 * n * math.log(ratio) - math.lgamma(n + 1) + ratio ** 2
        if log_bound <= log_eps:
            return n
    raise ValueError(
        f"coherent cutoff would exceed {COHERENT_CUTOFF_CAP} for ratio={ratio}, eps={eps}")


def coherent_truncate(r: float, sigma: float, eps: float) -> TruncatedCoherentState:
    """Truncated, renormalized coherent state of the scalar ``r``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    ratio = r / sigma
    n = coherent_cutoff(ratio, eps)
    if ratio == 0.0:
        amps = np.zeros(n)
        amps[0] = 1.0
        return TruncatedCoherentState(r=float(r), sigma=float(sigma), amplitudes=amps)
    k = np.arange(n)
    # log-domain so large ratios cannot overflow before normalization
    log_mag = k * math.log(abs(ratio)) - 0.5 * np.array([math.lgamma(i + 1.0) for i in k])
    mags = np.exp(log_mag - log_mag.max())
    signs = np.where((k % 2 == 1) & (ratio < 0), -1.0, 1.0)
    amps = signs * mags
    amps /= np.linalg.norm(amps)
    return TruncatedCoherentState(r=float(r), sigma=float(sigma), amplitudes=amps)


def coherent_vector(x, sigma: float, eps: float) -> tuple[TruncatedCoherentState, ...]:
    """Per-coordinate coherent states of a real vector (tensor factors)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return tuple(coherent_truncate(v, sigma, eps) for v in x)


def _pair_overlap(a: TruncatedCoherentState, b: TruncatedCoherentState) -> float:
    if a.sigma != b.sigma:
        raise ValueError(f"sigma mismatch: {a.sigma} vs {b.sigma}")
    n = min(a.cutoff, b.cutoff)
    return float(a.amplitudes[:n] @ b.amplitudes[:n])


def coherent_overlap(a, b) -> float:
    """Inner product of two (vector) coherent states: product of the
    per-coordinate truncated overlaps.  Converges to
    ``exp(-||x-y||^2 / (2 sigma^2))`` as the cutoffs grow."""
    if isinstance(a, TruncatedCoherentState):
        a = (a,)
    if isinstance(b, TruncatedCoherentState):
        b = (b,)
    if len(a) != len(b):
        raise ValueError("coherent vectors have different coordinate counts")
    out = 1.0
    for fa, fb in zip(a, b):
        out *= _pair_overlap(fa, fb)
    return out


def build_rho_from_coherent(ds: Dataset, sigma: float, eps: float,
                            max_elements: int = _RHO_ELEMENT_CAP) -> DensityOperator:
    """Density operator via the coherent-state route.

    Forms the superposition (1/sqrt(M)) sum_t |t>|psi_x_t> with truncated
    per-coordinate coherent states and traces out the Fock register.  The
    result approaches gram/M as ``eps`` shrinks.
    """
    states = [coherent_vector(ds.x[t], sigma, eps) for t in range(ds.size)]
    cutoff = max(f.cutoff for row in states for f in row)
    fock_dim = cutoff ** ds.dim
    if ds.size * fock_dim > max_elements:
        raise ValueError(
            f"Fock register would need {ds.size * fock_dim} amplitudes "
            f"(cap {max_elements}); increase eps")
    amp = np.empty((ds.size, fock_dim))
    for t, row in enumerate(states):
        vec = np.ones(1)
        for factor in row:
            padded = np.zeros(cutoff)
            padded[: factor.cutoff] = factor.amplitudes
            vec = np.kron(vec, padded)
        amp[t] = vec
    amp /= np.sqrt(ds.size)
    return DensityOperator(rho=amp @ amp.T)


def _apply_rotations(theta: np.ndarray, amps: np.ndarray) -> np.ndarray:
    """Apply the per-qubit rotation [[cos, sin], [-sin, cos]] on every qubit."""
    m = theta.size
    arr = amps.reshape((2,) * m)
    for j in range(m):
        g = np.array([[math.cos(theta[j]), math.sin(theta[j])],
                      [-math.sin(theta[j]), math.cos(theta[j])]])
        axis = m - 1 - j  # C-order reshape puts qubit 0 on the last axis
        arr = np.moveaxis(np.tensordot(g, np.moveaxis(arr, axis, 0), axes=(1, 0)), 0, axis)
    return arr.reshape(-1)


def apply_weight_unitary(theta, state: QubitState) -> QubitState:
    """Tensor rotation layer; afterwards the amplitude of |0...0> equals the
    weight-vector inner product with the input state."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if 2 ** theta.size != state.amplitudes.size:
        raise ValueError(
            f"state has {state.num_qubits} qubits but theta has {theta.size} angles")
    return QubitState(amplitudes=_apply_rotations(theta, state.amplitudes))


def hadamard_test_readout(theta, x, model: KernelModel,
                          shots: int | None = None, seed: int | None = None) -> ReadoutResult:
    """Ancilla-interference readout of the signed network output.

    Builds the augmented state (sqrt(R)|0>|f(x)> + |1>|0...0>)/sqrt(R+1),
    applies the rotation layer on the ancilla-0 branch (open-circle
    control), then mixes the ancilla so the two all-zero-register outcomes
    carry probabilities (sqrt(R) a -+ 1)^2 / (2(R+1)) with
    a = <w(theta)|f(x)>.  The probability difference inverts to ``a`` via
    the factor (R+1)/(2 sqrt(R)).

    Exact mode (shots=None) reads the probabilities from the state vector;
    shot mode draws outcome counts and inverts the empirical frequencies.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if 2 ** theta.size != model.size:
        raise ValueError("model center count must be 2**m to match theta")
    state, r_norm = feature_state(np.asarray(x, dtype=float), model)
    big = model.size
    amps = np.zeros(2 * big)
    amps[:big] = np.sqrt(r_norm / (r_norm + 1.0)) * state
    amps[big] = 1.0 / np.sqrt(r_norm + 1.0)

    amps[:big] = _apply_rotations(theta, amps[:big])  # fires only on ancilla |0>

    # ancilla mixer [[1,-1],[1,1]]/sqrt(2): outcome probabilities then match
    # the displayed +/- assignments (a plain Hadamard would swap the labels)
    low = amps[:big].copy()
    high = amps[big:].copy()
    amps[:big] = (low - high) / np.sqrt(2.0)
    amps[big:] = (low + high) / np.sqrt(2.0)

    p_plus = float(amps[0] ** 2)
    p_minus = float(amps[big] ** 2)
    inversion = (r_norm + 1.0) / (2.0 * np.sqrt(r_norm))

    if shots is None:
        return ReadoutResult(p_plus=p_plus, p_minus=p_minus,
                             estimate=(p_minus - p_plus) * inversion, shots=None)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    rest = max(0.0, 1.0 - p_plus - p_minus)
    probs = np.array([p_plus, p_minus, rest])
    counts = rng.multinomial(shots, probs / probs.sum())
    p_plus_hat = counts[0] / shots
    p_minus_hat = counts[1] / shots
    return ReadoutResult(p_plus=p_plus_hat, p_minus=p_minus_hat,
                         estimate=(p_minus_hat - p_plus_hat) * inversion, shots=shots)


def grad_quantities(theta, j: int, model: KernelModel, labels) -> tuple[float, float]:
    """The two readout sums of the training update, as density-operator
    sandwiches.

    ``q1`` couples the weight state and its j-th derivative state through
    rho, the diagonal M^2/R_t rescaling, and rho again; ``q2`` couples the
    derivative state through rho with the label vector M r_t / sqrt(R_t).
    Their difference equals M times the j-th loss-gradient component in
    normalized-feature mode.
    """
    if isinstance(labels, Dataset):
        labels = labels.labels
    labels = np.asarray(labels, dtype=float)
    if labels.shape != (model.size,):
        raise ValueError("labels length must match the model size")
    rho = model.gram / model.size
    w = materialize(theta)
    wj = materialize(shift_derivative(theta, j))
    u = rho @ w
    uj = rho @ wj
    scale = model.size ** 2 / model.row_norms
    q1 = float(np.sum(scale * u * uj))
    y = model.size * labels / np.sqrt(model.row_norms)
    q2 = float(wj @ (rho @ y))
    return q1, q2
