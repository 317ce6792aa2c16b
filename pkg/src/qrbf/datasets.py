"""Synthetic 2-D binary-classification corpora, CSV persistence, and splits.

Four pattern families of increasing difficulty are provided: ``blobs``
(two mirrored Gaussian clusters), ``annulus`` (inner disk vs. outer ring),
``xor-quadrants`` (sign of x*y), and ``checkerboard`` (4x4 parity grid).
Generation is per-class, positive class first, so labels are exactly
balanced and both classes are always present.

The ``noise`` knob means cluster spread for ``blobs`` and a guaranteed
separation margin around the class boundary for the other families.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FAMILIES = ("blobs", "annulus", "xor-quadrants", "checkerboard")

_BLOB_CENTER = np.array([0.5, 0.5])
_ANNULUS_INNER_RADIUS = 0.35
_CHECKER_CELLS = 4


class CsvFormatError(ValueError):
    """Raised when a dataset CSV file cannot be parsed or validated."""


@dataclass(frozen=True)
class Sample:
    """One labeled point: coordinates ``x`` and label ``r`` in {+1, -1}."""

    x: np.ndarray
    r: int


@dataclass(frozen=True)
class PatternSpec:
    """Recipe for a synthetic corpus: family, sample count, noise, seed."""

    family: str
    samples: int
    noise: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class Dataset:
    """Labeled sample collection: ``x`` is (M, n), ``labels`` is (M,) of +/-1."""

    x: np.ndarray
    labels: np.ndarray
    seed: int | None = None
    requested_samples: int | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError("x must be a (M, n) array with M >= 1")
        if labels.shape != (x.shape[0],):
            raise ValueError("labels must be a length-M vector")
        if not np.isfinite(x).all():
            raise ValueError("coordinates must be finite")
        if not np.isin(labels, (-1, 1)).all():
            raise ValueError("labels must be exactly +1 or -1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def samples(self) -> tuple[Sample, ...]:
        return tuple(Sample(self.x[t], int(self.labels[t])) for t in range(self.size))


def next_power_of_two(k: int) -> int:
    if k < 1:
        raise ValueError("k must be >= 1")
    return 1 << (k - 1).bit_length()


def _gen_blobs(rng, per_class, noise):
    pos = _BLOB_CENTER + noise * rng.standard_normal((per_class, 2))
    neg = -_BLOB_CENTER + noise * rng.standard_normal((per_class, 2))
    return np.clip(pos, -1.0, 1.0), np.clip(neg, -1.0, 1.0)


def _gen_annulus(rng, per_class, noise):
    r_inner = _ANNULUS_INNER_RADIUS
    r_ring_lo = r_inner + max(0.1, noise)
    if r_ring_lo >= 0.95:
        raise ValueError("noise too large for annulus separation")
    r_ring_hi = 1.0

    def ring(lo, hi, k):
        # uniform over area, not radius, so the band is evenly covered
        radius = np.sqrt(rng.uniform(lo ** 2, hi ** 2, k))
        angle = rng.uniform(0.0, 2.0 * np.pi, k)
        return np.column_stack((radius * np.cos(angle), radius * np.sin(angle)))

    return ring(0.0, r_inner, per_class), ring(r_ring_lo, r_ring_hi, per_class)


def _gen_xor(rng, per_class, noise):
    if noise >= 0.9:
        raise ValueError("noise too large for xor-quadrants margin")

    def quadrant_points(signs_choices, k):
        mags = rng.uniform(noise, 1.0, (k, 2))
        which = rng.integers(0, 2, k)
        signs = np.array(signs_choices, dtype=float)[which]
        return mags * signs

    pos = quadrant_points([(1.0, 1.0), (-1.0, -1.0)], per_class)
    neg = quadrant_points([(1.0, -1.0), (-1.0, 1.0)], per_class)
    return pos, neg


def _gen_checkerboard(rng, per_class, noise):
    cell = 2.0 / _CHECKER_CELLS
    inset = min(noise, 0.8 * cell / 2.0)
    cells = [(i, j) for i in range(_CHECKER_CELLS) for j in range(_CHECKER_CELLS)]
    even = [c for c in cells if (c[0] + c[1]) % 2 == 0]
    odd = [c for c in cells if (c[0] + c[1]) % 2 == 1]

    def fill(choices, k):
        idx = rng.integers(0, len(choices), k)
        corners = np.array(choices, dtype=float)[idx] * cell - 1.0
        offsets = rng.uniform(inset, cell - inset, (k, 2))
        return corners + offsets

    return fill(even, per_class), fill(odd, per_class)


_GENERATORS = {
    "blobs": _gen_blobs,
    "annulus": _gen_annulus,
    "xor-quadrants": _gen_xor,
    "checkerboard": _gen_checkerboard,
}


def generate(spec: PatternSpec) -> Dataset:
    """Generate a balanced synthetic corpus from ``spec``.

    The sample count is rounded up to the next power of two (the requested
    value is recorded on the dataset); output is deterministic per seed,
    positive class first, all coordinates within [-1, 1]^2.
    """
    if spec.family not in _GENERATORS:
        raise ValueError(f"unknown pattern family: {spec.family!r}")
    if spec.samples < 2:
        raise ValueError("need at least 2 samples")
    if not np.isfinite(spec.noise) or spec.noise < 0:
        raise ValueError("noise must be finite and >= 0")

    total = next_power_of_two(spec.samples)
    rng = np.random.default_rng(spec.seed)
    pos, neg = _GENERATORS[spec.family](rng, total // 2, spec.noise)
    x = np.concatenate((pos, neg))
    labels = np.concatenate((np.ones(total // 2, dtype=np.int64),
                             -np.ones(total // 2, dtype=np.int64)))
    return Dataset(x=x, labels=labels, seed=spec.seed, requested_samples=spec.samples)


def save_csv(ds: Dataset, path) -> None:
    """Write ``ds`` as header-less CSV rows ``x1,...,xn,label``.

    Coordinates use 17 significant digits so a round trip is exact.
    """
    with open(path, "w", encoding="ascii") as fh:
        for t in range(ds.size):
            coords = ",".join(format(v, ".17g") for v in ds.x[t])
            fh.write(f"{coords},{int(ds.labels[t])}\n")


def load_csv(path) -> Dataset:
    """Read a dataset written by :func:`save_csv` (or hand-made, same format)."""
    rows = []
    labels = []
    dim = None
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) < 2:
                raise CsvFormatError(f"line {lineno}: expected x1,...,xn,label")
            try:
                coords = [float(v) for v in fields[:-1]]
                label = float(fields[-1])
            except ValueError as exc:
                raise CsvFormatError(f"line {lineno}: {exc}") from None
            if label not in (1.0, -1.0):
                raise CsvFormatError(f"line {lineno}: label must be +1 or -1, got {fields[-1]}")
            if dim is None:
                dim = len(coords)
            elif len(coords) != dim:
                raise CsvFormatError(f"line {lineno}: expected {dim} coordinates, got {len(coords)}")
            rows.append(coords)
            labels.append(int(label))
    if not rows:
        raise CsvFormatError("no samples")
    return Dataset(x=np.array(rows), labels=np.array(labels))


def split(ds: Dataset, ratio: float, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Split into (train, test) with ``floor(ratio * M)`` training samples.

    The training count is clamped to [1, M-1] so both parts are non-empty;
    the shuffle is deterministic per seed and parts preserve dataset order.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie strictly between 0 and 1")
    if ds.size < 2:
        raise ValueError("need at least 2 samples to split")
    n_train = min(max(int(ratio * ds.size), 1), ds.size - 1)
    perm = np.random.default_rng(seed).permutation(ds.size)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    make = lambda idx: Dataset(x=ds.x[idx], labels=ds.labels[idx], seed=ds.seed)
    return make(train_idx), make(test_idx)
