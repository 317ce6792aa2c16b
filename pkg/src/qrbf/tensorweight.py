"""Tensor-product weight vectors parameterized by m angles.

The induced weight vector ``w(theta)`` is the Kronecker product of the unit
2-vectors ``(cos theta_j, sin theta_j)``, giving 2**m entries from m
parameters, always with unit Euclidean norm.  Factor ``j`` (0-based) pairs
with bit ``j`` of the weight index, least-significant bit first: entry
``t`` equals ``prod_j cos(theta_j - t_j * pi/2)``, i.e. factor j contributes
``cos`` when bit j of ``t`` is clear and ``sin`` when set.

The derivative with respect to ``theta_j`` is again a tensor-product weight
vector, obtained by shifting ``theta_j`` by +pi/2 (parameter-shift rule).
"""

from __future__ import annotations

import math

import numpy as np

from . import _accel

MAX_FACTORS = 20


def _as_theta(theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.ndim != 1 or theta.size < 1:
        raise ValueError("theta must be a non-empty 1-D angle vector")
    return theta


def num_factors(size: int) -> int:
    """m such that 2**m == size; rejects non-powers-of-two."""
    if size < 2 or size & (size - 1):
        raise ValueError(f"size {size} is not a power of two >= 2")
    return size.bit_length() - 1


def weight_entry(theta, t: int) -> float:
    """The ``t``-th entry of w(theta) without materializing the vector."""
    theta = _as_theta(theta)
    if not 0 <= t < 2 ** theta.size:
        raise IndexError(f"index {t} out of range for m={theta.size}")
    out = 1.0
    for j in range(theta.size):
        out *= math.sin(theta[j]) if (t >> j) & 1 else math.cos(theta[j])
    return out


def materialize(theta) -> np.ndarray:
    """Full weight vector of length 2**m; guarded against large m."""
    theta = _as_theta(theta)
    if theta.size > MAX_FACTORS:
        raise ValueError(f"m={theta.size} exceeds the materialization cap of {MAX_FACTORS}")
    return _accel.materialize(theta)


def fast_inner(theta, v) -> float:
    """w(theta) . v in O(2**m) by folding one factor per stage."""
    theta = _as_theta(theta)
    v = np.asarray(v, dtype=float)
    if v.shape != (2 ** theta.size,):
        raise ValueError(f"vector length {v.shape} does not match 2**{theta.size}")
    return _accel.fast_inner(theta, v)


def shift_derivative(theta, j: int) -> np.ndarray:
    """Angles whose weight vector is the derivative of w(theta) w.r.t. theta_j.

    Shifting twice on the same factor (total +pi) yields the second
    derivative; mixed second derivatives shift two distinct factors.
    """
    theta = _as_theta(theta)
    if not 0 <= j < theta.size:
        raise IndexError(f"factor index {j} out of range for m={theta.size}")
    shifted = theta.copy()
    shifted[j] += math.pi / 2.0
    return shifted


def weight_with_derivatives(theta) -> np.ndarray:
    """(m+1, 2**m) matrix: row 0 is w(theta), row j+1 its j-th derivative."""
    theta = _as_theta(theta)
    rows = [materialize(theta)]
    rows += [materialize(shift_derivative(theta, j)) for j in range(theta.size)]
    return np.stack(rows)
