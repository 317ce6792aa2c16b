"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import time: numba is used when it imports
cleanly, unless the environment variable ``QRBF_PURE_NUMPY`` is set to a
truthy value (``1``, ``true``, ``yes``), which forces the numpy path.
Both implementations are kept importable (``*_np`` / ``*_nb`` suffixes) so
they can be compared directly; ``benchmarks/bench_kernels.py`` times them
against each other.

Weight-index convention (library-wide): factor ``j`` of a tensor-product
weight pairs with bit ``j`` of the weight index, least-significant bit
first.  Index ``t`` therefore decomposes as ``t = sum_j t_j * 2**j``.
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("QRBF_PURE_NUMPY", "").strip().lower() in ("1", "true", "yes")

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised via env-flag subprocess test
    njit = None
    NUMBA_AVAILABLE = False

_USE_NUMBA = NUMBA_AVAILABLE and not _FORCE_NUMPY


def active_backend() -> str:
    """Name of the backend the dispatching wrappers use: 'numba' or 'numpy'."""
    return "numba" if _USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def pairwise_sq_dists_np(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between rows of ``a`` and rows of ``b``.

    Computed from explicit coordinate differences (no norm-expansion trick),
    so coincident rows give exactly 0.0.
    """
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def materialize_np(theta: np.ndarray) -> np.ndarray:
    """Tensor-product weight vector of length 2**m for angles ``theta``.

    Entry ``t`` is the product over factors j of cos(theta[j]) when bit j of
    ``t`` is 0 and sin(theta[j]) when it is 1.
    """
    out = np.ones(1)
    for c, s in zip(np.cos(theta), np.sin(theta)):
        out = np.concatenate((c * out, s * out))
    return out


def fast_inner_np(theta: np.ndarray, v: np.ndarray) -> float:
    """Inner product of the tensor-product weight vector with ``v`` in O(2**m).

    Folds ``v`` against one (cos, sin) factor per stage, halving the length
    each time; never materializes the weight vector.
    """
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    for j in range(theta.size - 1, -1, -1):
        half = v.size // 2
        v = cos_t[j] * v[:half] + sin_t[j] * v[half:]
    return float(v[0])


# ---------------------------------------------------------------------------
# numba implementations (same arithmetic, loop form)
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:

    @njit(cache=True)
    def pairwise_sq_dists_nb(a, b):  # pragma: no cover - measured via dispatch
        ma, n = a.shape
        mb = b.shape[0]
        out = np.empty((ma, mb))
        for i in range(ma):
            for j in range(mb):
                acc = 0.0
                for k in range(n):
                    d = a[i, k] - b[j, k]
                    acc += d * d
                out[i, j] = acc
        return out

    @njit(cache=True)
    def materialize_nb(theta):  # pragma: no cover
        m = theta.size
        out = np.empty(2 ** m)
        out[0] = 1.0
        size = 1
        for j in range(m):
            c = np.cos(theta[j])
            s = np.sin(theta[j])
            for i in range(size):
                out[size + i] = s * out[i]
                out[i] = c * out[i]
            size *= 2
        return out

    @njit(cache=True)
    def fast_inner_nb(theta, v):  # pragma: no cover
        m = theta.size
        work = v.copy()
        length = v.size
        for j in range(m - 1, -1, -1):
            half = length // 2
            c = np.cos(theta[j])
            s = np.sin(theta[j])
            for i in range(half):
                work[i] = c * work[i] + s * work[half + i]
            length = half
        return work[0]

else:  # pragma: no cover
    pairwise_sq_dists_nb = None
    materialize_nb = None
    fast_inner_nb = None


# ---------------------------------------------------------------------------
# dispatching wrappers
# ---------------------------------------------------------------------------

if _USE_NUMBA:
    pairwise_sq_dists = pairwise_sq_dists_nb
    materialize = materialize_nb
    _fast_inner_impl = fast_inner_nb

    def fast_inner(theta: np.ndarray, v: np.ndarray) -> float:
        return float(_fast_inner_impl(theta, v))

else:
    pairwise_sq_dists = pairwise_sq_dists_np
    materialize = materialize_np
    fast_inner = fast_inner_np
