"""Training-side score c.d.f. estimates.

The calibration c.d.f. counts scores with a non-strict inequality, but the
training-side objects consumed by the set-size bound count strictly
(events {score < r}); the two inequalities are preserved exactly, so the
step c.d.f.s here are left-continuous.  Three constructions are provided:
the ensemble-averaged training c.d.f., the doubly empirical variant with
one independent model draw per training point, and a Monte Carlo
approximation of the population c.d.f. from fresh draws.  A piecewise
linear grid representation is also available for analytic inputs.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .scores import ScoreSpec, nc_score

__all__ = [
    "CdfEstimate",
    "step_cdf_from_scores",
    "grid_cdf",
    "training_cdf",
    "population_cdf_mc",
    "generalization_gap",
    "cdf_to_csv",
    "cdf_from_csv",
]

_EVAL_FUZZ = 1e-12


@dataclass(frozen=True, eq=False)
class CdfEstimate:
    """A score c.d.f. on [0, r_max], evaluable at any point of the range.

    ``kind`` is ``"step"`` (left-continuous step function counting scores
    with strict inequality; ``xs`` are the unique jump points and ``ys``
    the cumulative weight through each jump) or ``"grid"`` (piecewise
    linear interpolation through ``(xs, ys)`` knots, extended flat outside
    them).  Values are validated to be non-decreasing and within [0, 1].
    """

    kind: str
    xs: np.ndarray
    ys: np.ndarray
    r_max: float
    source: str = "analytic"

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size == 0:
            raise ValueError("xs and ys must be matching nonempty 1-d arrays")
        if self.kind not in ("step", "grid"):
            raise ValueError(f"unknown cdf kind {self.kind!r}")
        if np.any(np.diff(xs) < 0):
            raise ValueError("xs must be sorted ascending")
        if np.any(np.diff(ys) < -_EVAL_FUZZ):
            raise ValueError("cdf values must be non-decreasing")
        if ys[0] < -_EVAL_FUZZ or ys[-1] > 1 + _EVAL_FUZZ:
            raise ValueError("cdf values must lie in [0, 1]")
        if xs[0] < 0 or xs[-1] > self.r_max + _EVAL_FUZZ:
            raise ValueError(f"xs must lie in [0, {self.r_max}]")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", np.clip(ys, 0.0, 1.0))

    def __call__(self, r):
        """Evaluate the c.d.f.; accepts scalars or arrays."""
        r = np.asarray(r, dtype=float)
        if self.kind == "step":
            idx = np.searchsorted(self.xs, r, side="left")
            padded = np.concatenate(([0.0], self.ys))
            out = padded[idx]
        else:
            out = np.interp(r, self.xs, self.ys)
        return float(out) if out.ndim == 0 else out

    def breakpoints(self) -> np.ndarray:
        """Jump points (step) or knots (grid)."""
        return self.xs.copy()

    def first_reaching(self, threshold: float) -> float:
        """Infimum of {r in [0, r_max] : F(r) >= threshold}; r_max if empty.

        For a step c.d.f. the infimum is the jump point at which the
        cumulative weight reaches the threshold (the set of qualifying r is
        open on the left there, but the infimum is still the jump point).
        """
        if threshold <= 0.0:
            return 0.0
        if self.kind == "step":
            j = int(np.searchsorted(self.ys, threshold - _EVAL_FUZZ, side="left"))
            if j >= self.ys.size:
                return float(self.r_max)
            return float(self.xs[j])
        ys, xs = self.ys, self.xs
        if ys[0] >= threshold - _EVAL_FUZZ:
            return 0.0
        j = int(np.searchsorted(ys, threshold - _EVAL_FUZZ, side="left"))
        if j >= ys.size:
            return float(self.r_max)
        x0, x1, y0, y1 = xs[j - 1], xs[j], ys[j - 1], ys[j]
        if y1 <= y0:
            return float(x1)
        return float(x0 + (threshold - y0) * (x1 - x0) / (y1 - y0))


def step_cdf_from_scores(scores: np.ndarray, r_max: float, source: str) -> CdfEstimate:
    """Left-continuous step c.d.f. of a score sample (strict counting)."""
    scores = np.asarray(scores, dtype=float).ravel()
    if scores.size == 0:
        raise ValueError("empty score sample")
    values, counts = np.unique(scores, return_counts=True)
    cum = np.cumsum(counts) / scores.size
    return CdfEstimate(kind="step", xs=values, ys=cum, r_max=r_max, source=source)


def grid_cdf(r: Sequence[float], value: Sequence[float], r_max: float, source: str = "analytic") -> CdfEstimate:
    """Piecewise linear c.d.f. through the given knots."""
    return CdfEstimate(kind="grid", xs=np.asarray(r, float), ys=np.asarray(value, float), r_max=r_max, source=source)


def training_cdf(
    models: Sequence[Callable],
    features: np.ndarray,
    targets: np.ndarray,
    spec: ScoreSpec,
    mode: str = "averaged",
) -> CdfEstimate:
    """Empirical training c.d.f. of the nonconformity scores.

    ``mode="averaged"`` averages the per-point event probability over every
    supplied model (the model distribution is always represented as a
    finite ensemble), which is the same as pooling all model-point scores
    with equal weight.  ``mode="doubly_empirical"`` applies model i to
    training point i and requires one model per point.

    Parameters
    ----------
    models : sequence of callables
        Each maps a feature matrix to predictions.
    features, targets : ndarray
        Training points.
    spec : ScoreSpec
        Score family used to score predictions against targets.
    """
    features = np.asarray(features)
    targets = np.asarray(targets)
    if len(models) == 0 or features.shape[0] == 0:
        raise ValueError("need at least one model and one training point")
    if mode == "averaged":
        pooled = [np.asarray(nc_score(spec, np.asarray(m(features)), targets)).ravel() for m in models]
        scores = np.concatenate(pooled)
    elif mode == "doubly_empirical":
        if len(models) != features.shape[0]:
            raise ValueError(
                f"doubly_empirical needs one model per point, got {len(models)} models "
                f"for {features.shape[0]} points"
            )
        scores = np.array(
            [nc_score(spec, np.asarray(m(features[i : i + 1]))[0], targets[i]) for i, m in enumerate(models)]
        )
    else:
        raise ValueError(f"unknown mode {mode!r}")
    source = "training_averaged" if mode == "averaged" else "doubly_empirical"
    return step_cdf_from_scores(scores, r_max=spec.r_max, source=source)


def population_cdf_mc(
    model_sampler: Callable,
    data_sampler: Callable,
    spec: ScoreSpec,
    n_samples: int,
    seed: int,
) -> CdfEstimate:
    """Monte Carlo population c.d.f. from independent (model, data) draws.

    Parameters
    ----------
    model_sampler : callable
        ``model_sampler(rng) -> model``; one draw per sample.  Draws that
        return the same object are grouped so prediction stays batched.
    data_sampler : callable
        ``data_sampler(rng, n) -> (X, y)`` producing n fresh points.
    n_samples : int
        Number of independent draws (>= 1).
    seed : int
        Seed; the estimate is deterministic given it.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    X, y = data_sampler(rng, n_samples)
    X = np.asarray(X)
    y = np.asarray(y)
    models = [model_sampler(rng) for _ in range(n_samples)]
    by_id: dict[int, list[int]] = {}
    model_of: dict[int, Callable] = {}
    for i, m in enumerate(models):
        by_id.setdefault(id(m), []).append(i)
        model_of[id(m)] = m
    scores = np.empty(n_samples, dtype=float)
    for key, rows in by_id.items():
        rows = np.asarray(rows)
        preds = np.asarray(model_of[key](X[rows]))
        scores[rows] = nc_score(spec, preds, y[rows])
    return step_cdf_from_scores(scores, r_max=spec.r_max, source="population_mc")


def generalization_gap(pop: CdfEstimate, train: CdfEstimate, grid: Sequence[float]) -> float:
    """Sup-norm distance between two c.d.f. estimates over a refined grid.

    The grid is refined with the breakpoints of both estimates plus points
    immediately on either side of each (step functions attain their sup at
    jump points), so the returned maximum is the true supremum for step
    inputs.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty evaluation grid")
    r_max = min(pop.r_max, train.r_max)
    pieces = [grid, pop.breakpoints(), train.breakpoints()]
    base = np.concatenate(pieces)
    eps = 1e-9 * max(1.0, r_max)
    refined = np.concatenate([base, base - eps, base + eps])
    refined = np.clip(refined, 0.0, r_max)
    refined = np.unique(refined)
    return float(np.max(np.abs(pop(refined) - train(refined))))


def cdf_to_csv(cdf: CdfEstimate, path=None) -> str:
    """Serialize a c.d.f. estimate to CSV with columns r, value, source.

    Writes to ``path`` when given; always returns the CSV text.
    """
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["r", "value", "source"])
    tag = f"{cdf.kind}:{cdf.source}"
    for x, v in zip(cdf.xs, cdf.ys):
        writer.writerow([repr(float(x)), repr(float(v)), tag])
    writer.writerow([repr(float(cdf.r_max)), "", f"{tag}:r_max"])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def cdf_from_csv(source) -> CdfEstimate:
    """Rebuild a c.d.f. estimate from its CSV serialization."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as fh:
            text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["r", "value", "source"]:
        raise ValueError("not a cdf CSV (bad header)")
    body, tail = rows[1:-1], rows[-1]
    if not body or not tail[2].endswith(":r_max"):
        raise ValueError("not a cdf CSV (missing r_max row)")
    kind, src = body[0][2].split(":", 1)
    xs = np.array([float(r[0]) for r in body])
    ys = np.array([float(r[1]) for r in body])
    return CdfEstimate(kind=kind, xs=xs, ys=ys, r_max=float(tail[0]), source=src)
