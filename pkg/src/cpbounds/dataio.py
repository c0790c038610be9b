"""Datasets: synthetic generators, CSV ingestion, and splitting.

Synthetic data stands in for real benchmark exports at desk scale:
classification draws equal-prior Gaussian blobs with class means on a
scaled circle, regression draws a smooth nonlinear function of the
features plus Gaussian noise, clipped into the bounded target interval
(the clip rate is recorded in the provenance so configurations can keep it
negligible).  Real data enters through a single CSV format: header row,
feature columns ``x0..x{d-1}``, target column ``y``, comma delimiter,
``.`` decimal point, UTF-8.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .scores import Discrete, Interval, LabelSpace

__all__ = [
    "Dataset",
    "Split",
    "CsvSchema",
    "generate_synthetic",
    "load_csv",
    "save_csv",
    "split_dataset",
]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Features, targets, their label space, and where they came from."""

    features: np.ndarray
    targets: np.ndarray
    space: LabelSpace
    provenance: dict

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1:
            raise ValueError("features must be a nonempty (n, d) matrix")
        if isinstance(self.space, Discrete):
            y = np.asarray(self.targets)
            if not np.issubdtype(y.dtype, np.integer):
                raise ValueError("discrete targets must be integers")
            if np.any(y < 0) or np.any(y >= self.space.n_labels):
                raise ValueError(f"labels must lie in [0, {self.space.n_labels})")
        else:
            y = np.asarray(self.targets, dtype=float)
            if np.any(y < self.space.lo) or np.any(y > self.space.hi):
                raise ValueError(f"targets must lie in [{self.space.lo}, {self.space.hi}]")
        if y.shape != (X.shape[0],):
            raise ValueError("targets must be one per feature row")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def take(self, idx: np.ndarray, role: str) -> "Dataset":
        prov = dict(self.provenance)
        prov["split"] = role
        return Dataset(self.features[idx], self.targets[idx], self.space, prov)


@dataclass(frozen=True)
class Split:
    """Index-disjoint train / calibration / test subsets."""

    train: Dataset
    cal: Dataset
    test: Dataset


def regression_landscape(dim: int, landscape_seed: int = 0):
    """Direction vectors of the synthetic regression function."""
    rng = np.random.default_rng(landscape_seed)
    w1 = rng.standard_normal(dim) / np.sqrt(dim)
    w2 = rng.standard_normal(dim) / np.sqrt(dim)
    return w1, w2


def generate_synthetic(kind: str, n: int, seed: int, **params) -> Dataset:
    """Generate a synthetic dataset, deterministic given the seed.

    Parameters
    ----------
    kind : {"classification", "regression"}
        Classification takes ``n_labels``, ``dim`` and ``separation`` (how
        far apart the class means sit, in noise standard deviations).
        Regression takes ``dim``, ``noise`` (noise standard deviation as a
        fraction of the target span), ``lo``, ``hi`` and ``landscape_seed``
        (fixes the underlying regression function; the data distribution
        depends only on the parameters, never on ``seed``).
    n : int
        Number of points.
    seed : int
        Sampling seed: varies the sample, not the distribution.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    if kind == "classification":
        k = int(params.get("n_labels", 10))
        d = int(params.get("dim", 8))
        sep = float(params.get("separation", 3.0))
        if k < 2 or d < 1:
            raise ValueError(f"invalid shape parameters n_labels={k}, dim={d}")
        means = np.zeros((k, d))
        if d == 1:
            means[:, 0] = sep * (np.arange(k) - (k - 1) / 2.0)
        else:
            angles = 2.0 * np.pi * np.arange(k) / k
            means[:, 0] = sep * np.cos(angles)
            means[:, 1] = sep * np.sin(angles)
        labels = rng.integers(0, k, size=n)
        X = rng.standard_normal((n, d)) + means[labels]
        prov = {"source": "synthetic_classification", "seed": seed, "n_labels": k, "dim": d, "separation": sep}
        return Dataset(X, labels, Discrete(k), prov)
    if kind == "regression":
        d = int(params.get("dim", 8))
        noise = float(params.get("noise", 0.05))
        lo = float(params.get("lo", 0.0))
        hi = float(params.get("hi", 1.0))
        landscape_seed = int(params.get("landscape_seed", 0))
        if d < 1 or noise < 0 or hi <= lo:
            raise ValueError(f"invalid parameters dim={d}, noise={noise}, interval=[{lo}, {hi}]")
        w1, w2 = regression_landscape(d, landscape_seed)
        X = rng.uniform(-1.0, 1.0, size=(n, d))
        raw = np.sin(2.0 * X @ w1) + 0.5 * np.cos(np.pi * X @ w2)
        span = hi - lo
        clean = (lo + hi) / 2.0 + 0.25 * span * raw
        y = clean + noise * span * rng.standard_normal(n)
        clipped = np.clip(y, lo, hi)
        clip_rate = float(np.mean(clipped != y))
        prov = {
            "source": "synthetic_regression",
            "seed": seed,
            "dim": d,
            "noise": noise,
            "lo": lo,
            "hi": hi,
            "landscape_seed": landscape_seed,
            "clip_rate": clip_rate,
        }
        return Dataset(X, clipped, Interval(lo, hi), prov)
    raise ValueError(f"unknown generator kind {kind!r}")


@dataclass(frozen=True)
class CsvSchema:
    """Expected CSV layout: named feature columns, one target column."""

    feature_columns: tuple
    target_column: str
    space: LabelSpace


def load_csv(path, schema: CsvSchema) -> Dataset:
    """Load a dataset from CSV, enforcing the schema and space invariants.

    Malformed rows are reported with their 1-based row number (the header
    is row 1).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        expected = list(schema.feature_columns) + [schema.target_column]
        if header != expected:
            raise ValueError(f"{path}: header {header} does not match schema {expected}")
        rows = []
        targets = []
        discrete = isinstance(schema.space, Discrete)
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise ValueError(f"{path}: row {row_no} has {len(row)} fields, expected {len(expected)}")
            try:
                feats = [float(v) for v in row[:-1]]
                target = int(row[-1]) if discrete else float(row[-1])
            except ValueError:
                raise ValueError(f"{path}: row {row_no} is not numeric: {row}") from None
            rows.append(feats)
            targets.append(target)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    X = np.asarray(rows, dtype=float)
    y = np.asarray(targets)
    return Dataset(X, y, schema.space, {"source": "csv", "path": str(path), "rows": len(rows)})


def save_csv(data: Dataset, path) -> None:
    """Write a dataset in the canonical CSV layout (exact float round-trip)."""
    discrete = isinstance(data.space, Discrete)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j}" for j in range(data.dim)] + ["y"])
        for xi, yi in zip(data.features, data.targets):
            target = str(int(yi)) if discrete else repr(float(yi))
            writer.writerow([repr(float(v)) for v in xi] + [target])


def split_dataset(data: Dataset, n_tr: int, n_cal: int, n_test: int, seed: int) -> Split:
    """Randomly split into disjoint train / calibration / test subsets.

    A seeded uniform permutation is cut contiguously, so the three parts
    are index-disjoint and reproducible.
    """
    if min(n_tr, n_cal, n_test) < 1:
        raise ValueError("each split part needs at least one point")
    total = n_tr + n_cal + n_test
    if total > data.n:
        raise ValueError(f"requested {total} points but dataset has {data.n}")
    perm = np.random.default_rng(seed).permutation(data.n)
    return Split(
        train=data.take(perm[:n_tr], "train"),
        cal=data.take(perm[n_tr : n_tr + n_cal], "cal"),
        test=data.take(perm[n_tr + n_cal : total], "test"),
    )
