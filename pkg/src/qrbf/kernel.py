"""Gaussian feature maps, Gram matrix, row norms, and the kernel density operator.

A fitted :class:`KernelModel` keeps the training samples as centers, the
shared width ``sigma``, the Gram matrix with entries
``exp(-||x_s - x_t||^2 / (2 sigma^2))``, and the squared feature norms
``R_t = sum_s exp(-||x_s - x_t||^2 / sigma^2)``.  Note the two different
exponent scales: Gram entries use ``2 sigma^2`` while the squared norms use
``sigma^2`` (each norm term is the square of a Gram entry).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .datasets import Dataset


@dataclass(frozen=True)
class KernelModel:
    centers: np.ndarray
    sigma: float
    gram: np.ndarray
    row_norms: np.ndarray

    @property
    def size(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class DensityOperator:
    """Normalized kernel matrix ``rho = gram / M``; symmetric PSD, trace 1."""

    rho: np.ndarray


def sigma_heuristic(ds: Dataset) -> float:
    """Kernel width: max pairwise distance divided by sqrt(2 M)."""
    if ds.size < 2:
        raise ValueError("need at least 2 samples for the width heuristic")
    d2 = _accel.pairwise_sq_dists(ds.x, ds.x)
    max_dist = float(np.sqrt(d2.max()))
    if max_dist == 0.0:
        raise ValueError("all samples coincide; kernel width would be zero")
    return max_dist / np.sqrt(2.0 * ds.size)


def build_kernel_model(ds: Dataset, sigma: float | None = None) -> KernelModel:
    """Fit a kernel model on ``ds`` (centers = samples), computing ``sigma``
    by the max-distance heuristic unless given explicitly."""
    if sigma is None:
        sigma = sigma_heuristic(ds)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d2 = _accel.pairwise_sq_dists(ds.x, ds.x)
    gram = np.exp(-d2 / (2.0 * sigma * sigma))
    row_norms = np.einsum("st,st->t", gram, gram)
    return KernelModel(centers=ds.x.copy(), sigma=float(sigma), gram=gram, row_norms=row_norms)


def feature_vector(x, model: KernelModel) -> np.ndarray:
    """Gaussian similarities of ``x`` to every center; entries in (0, 1]."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise ValueError(f"expected a length-{model.dim} input, got shape {x.shape}")
    d2 = _accel.pairwise_sq_dists(x[None, :], model.centers)[0]
    return np.exp(-d2 / (2.0 * model.sigma ** 2))


def feature_state(x, model: KernelModel) -> tuple[np.ndarray, float]:
    """Unit-norm feature vector of ``x`` plus its squared raw norm ``R``."""
    fv = feature_vector(x, model)
    r = float(fv @ fv)
    return fv / np.sqrt(r), r


def feature_matrix(model: KernelModel, x: np.ndarray, normalize: bool = False) -> np.ndarray:
    """Row-per-input feature matrix against the model centers.

    With ``normalize=True`` rows are scaled to unit Euclidean norm (the
    feature-state convention); otherwise raw Gaussian similarities.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.dim:
        raise ValueError(f"expected an (K, {model.dim}) input batch, got shape {x.shape}")
    d2 = _accel.pairwise_sq_dists(x, model.centers)
    phi = np.exp(-d2 / (2.0 * model.sigma ** 2))
    if normalize:
        phi /= np.sqrt(np.einsum("tk,tk->t", phi, phi))[:, None]
    return phi


def density_operator(model: KernelModel) -> DensityOperator:
    """Gram matrix scaled to unit trace."""
    return DensityOperator(rho=model.gram / model.size)
