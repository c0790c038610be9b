"""Nonconformity scores and the score-level density.

A score function measures how badly a candidate label conforms to a point
prediction.  Two families are supported: the 0-1 score for discrete label
spaces, and powered absolute error |f(x) - y|^p for a bounded interval of
real targets.  For each family the module also provides the score-level
density: the fraction of (input, uniform candidate label) mass that lands
at each score level.  That density is available in closed form and as a
Monte Carlo estimate from data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

__all__ = [
    "Discrete",
    "Interval",
    "LabelSpace",
    "label_measure",
    "ScoreSpec",
    "zero_one_score",
    "lp_power_score",
    "nc_score",
    "GammaDensity",
    "gamma_closed_form",
    "gamma_empirical",
]


@dataclass(frozen=True)
class Discrete:
    """A finite label space {0, ..., n_labels - 1}."""

    n_labels: int

    def __post_init__(self):
        if self.n_labels < 2:
            raise ValueError(f"need at least 2 labels, got {self.n_labels}")


@dataclass(frozen=True)
class Interval:
    """A bounded interval of real-valued targets [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


LabelSpace = Union[Discrete, Interval]


def label_measure(space: LabelSpace) -> float:
    """Total size of the label space: label count or interval length."""
    if isinstance(space, Discrete):
        return float(space.n_labels)
    return space.width


@dataclass(frozen=True)
class ScoreSpec:
    """A nonconformity score family together with its score range.

    ``kind`` is ``"zero_one"`` (scores in {0, 1}, mismatch indicator) or
    ``"lp_power"`` (scores |prediction - truth|^p on a bounded interval).
    Use :func:`zero_one_score` / :func:`lp_power_score` to construct.
    """

    kind: str
    p: float = 1.0
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zero_one", "lp_power"):
            raise ValueError(f"unknown score kind {self.kind!r}")
        if self.kind == "lp_power":
            if self.p < 1:
                raise ValueError(f"power must be >= 1, got {self.p}")
            if not self.lo < self.hi:
                raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def r_max(self) -> float:
        """Largest attainable score value."""
        if self.kind == "zero_one":
            return 1.0
        return (self.hi - self.lo) ** self.p


def zero_one_score() -> ScoreSpec:
    """Mismatch-indicator score for classification: 0 iff labels agree."""
    return ScoreSpec(kind="zero_one")


def lp_power_score(p: float, space: Interval) -> ScoreSpec:
    """Powered absolute error |prediction - truth|^p on a bounded interval."""
    return ScoreSpec(kind="lp_power", p=float(p), lo=space.lo, hi=space.hi)


def nc_score(spec: ScoreSpec, prediction, truth):
    """Evaluate the nonconformity score of a prediction against a label.

    Accepts scalars or equally shaped numpy arrays and broadcasts.

    Parameters
    ----------
    spec : ScoreSpec
        Score family.
    prediction, truth : int, float or ndarray
        Discrete labels for the 0-1 score; reals inside the score's
        interval for the powered-error score.

    Returns
    -------
    float or ndarray
        Score value(s) in [0, spec.r_max].
    """
    pred = np.asarray(prediction)
    true = np.asarray(truth)
    if spec.kind == "zero_one":
        if not (np.issubdtype(pred.dtype, np.integer) and np.issubdtype(true.dtype, np.integer)):
            raise TypeError("0-1 score expects integer labels on both sides")
        out = (pred != true).astype(float)
    else:
        if not (np.issubdtype(pred.dtype, np.floating) or np.issubdtype(pred.dtype, np.integer)):
            raise TypeError("powered-error score expects real arguments")
        if np.any(pred < spec.lo) or np.any(pred > spec.hi):
            raise ValueError(f"prediction outside [{spec.lo}, {spec.hi}]")
        if np.any(true < spec.lo) or np.any(true > spec.hi):
            raise ValueError(f"truth outside [{spec.lo}, {spec.hi}]")
        out = np.abs(pred.astype(float) - true.astype(float)) ** spec.p
    if out.ndim == 0:
        return float(out)
    return out


_MASS_TOL = 1e-9
_MONOTONE_GRID = 512


@dataclass(frozen=True, eq=False)
class GammaDensity:
    """Density of score levels under a uniform candidate label.

    Three representations:

    - ``"atoms"``: point masses at discrete score values (``values``,
      ``masses``); masses sum to one.
    - ``"power_law"``: the closed form 2 r^{1/p-1} / (p * width) on
      (0, r_max] with r_max = width**p.  This is an upper envelope: it
      ignores the clipping of candidate labels at the interval edges, so
      it integrates to 2 (not 1) over the full range.
    - ``"tabulated"``: a histogram density over equal-width bins
      (``bin_edges``, ``densities``).

    ``monotone_nondecreasing`` is computed at construction, never assumed;
    bound evaluation consults it when the endpoint tail rule is requested.
    """

    kind: str
    r_max: float
    values: np.ndarray | None = None
    masses: np.ndarray | None = None
    p: float = 1.0
    width: float = 1.0
    bin_edges: np.ndarray | None = None
    densities: np.ndarray | None = None
    monotone_nondecreasing: bool = field(init=False, default=False)

    def __post_init__(self):
        if self.kind == "atoms":
            v = np.asarray(self.values, dtype=float)
            m = np.asarray(self.masses, dtype=float)
            if v.shape != m.shape or v.ndim != 1 or v.size == 0:
                raise ValueError("atoms need matching 1-d values and masses")
            order = np.argsort(v)
            v, m = v[order], m[order]
            if np.any(m <= 0):
                raise ValueError("atom masses must be positive")
            if abs(m.sum() - 1.0) > _MASS_TOL:
                raise ValueError(f"atom masses sum to {m.sum()}, expected 1")
            object.__setattr__(self, "values", v)
            object.__setattr__(self, "masses", m)
            mono = bool(np.all(np.diff(m) >= -1e-12))
        elif self.kind == "power_law":
            if self.p < 1 or self.width <= 0:
                raise ValueError("power_law needs p >= 1 and width > 0")
            if abs(self.r_max - self.width**self.p) > 1e-9 * max(1.0, self.r_max):
                raise ValueError("power_law r_max must equal width**p")
            grid = np.linspace(self.r_max / _MONOTONE_GRID, self.r_max, _MONOTONE_GRID)
            dens = self.density(grid)
            mono = bool(np.all(np.diff(dens) >= -1e-12 * dens[0]))
        elif self.kind == "tabulated":
            e = np.asarray(self.bin_edges, dtype=float)
            d = np.asarray(self.densities, dtype=float)
            if e.ndim != 1 or d.ndim != 1 or e.size != d.size + 1 or d.size == 0:
                raise ValueError("tabulated needs bin_edges of length len(densities)+1")
            if np.any(np.diff(e) <= 0):
                raise ValueError("bin edges must be strictly increasing")
            if np.any(d < 0):
                raise ValueError("densities must be nonnegative")
            object.__setattr__(self, "bin_edges", e)
            object.__setattr__(self, "densities", d)
            mono = bool(np.all(np.diff(d) >= -1e-12 * max(1.0, d.max())))
        else:
            raise ValueError(f"unknown density kind {self.kind!r}")
        object.__setattr__(self, "monotone_nondecreasing", mono)

    def density(self, r):
        """Density value at score level r (continuous representations only)."""
        r = np.asarray(r, dtype=float)
        if self.kind == "power_law":
            # 0 ** 0 == 1, so p == 1 gives the constant 2/width at r = 0 too;
            # for p > 1 the value at 0 diverges (integrable singularity).
            with np.errstate(divide="ignore"):
                out = 2.0 * r ** (1.0 / self.p - 1.0) / (self.p * self.width)
        elif self.kind == "tabulated":
            idx = np.clip(
                np.searchsorted(self.bin_edges, r, side="right") - 1, 0, self.densities.size - 1
            )
            out = self.densities[idx]
        else:
            raise ValueError("an atom density has no pointwise density values")
        return float(out) if out.ndim == 0 else out

    def atom_mass_at(self, r: float) -> float:
        """Point mass exactly at level r; zero for continuous representations."""
        if self.kind != "atoms":
            return 0.0
        hit = np.isclose(self.values, r, rtol=0.0, atol=1e-12 * max(1.0, self.r_max))
        return float(self.masses[hit].sum())

    def mass_upto(self, r: float, inclusive: bool = True) -> float:
        """Integral of the density over [0, r] (or [0, r) when not inclusive)."""
        r = float(min(max(r, 0.0), self.r_max))
        if self.kind == "atoms":
            if inclusive:
                keep = self.values <= r + 1e-12 * max(1.0, self.r_max)
            else:
                keep = self.values < r - 1e-12 * max(1.0, self.r_max)
            return float(self.masses[keep].sum())
        if self.kind == "power_law":
            return 2.0 * r ** (1.0 / self.p) / self.width
        edges, dens = self.bin_edges, self.densities
        covered = np.clip(np.minimum(edges[1:], r) - edges[:-1], 0.0, None)
        return float(np.sum(dens * covered))

    def mass_between(self, a: float, b: float) -> float:
        """Integral of a continuous density over [a, b]."""
        if self.kind == "atoms":
            raise ValueError("mass_between is for continuous densities")
        return self.mass_upto(b) - self.mass_upto(a)


def gamma_closed_form(spec: ScoreSpec, space: LabelSpace) -> GammaDensity:
    """Closed-form score-level density for a (score, label space) pairing.

    For the 0-1 score over ``n`` discrete labels the density is two atoms:
    mass 1/n at score 0 and 1 - 1/n at score 1.  For the powered error over
    an interval of width ``w`` it is the envelope 2 r^{1/p-1} / (p w).

    Raises
    ------
    ValueError
        If the pairing is unsupported or the score interval disagrees with
        the label space.
    """
    if spec.kind == "zero_one" and isinstance(space, Discrete):
        k = space.n_labels
        return GammaDensity(
            kind="atoms", r_max=1.0, values=np.array([0.0, 1.0]), masses=np.array([1 / k, 1 - 1 / k])
        )
    if spec.kind == "lp_power" and isinstance(space, Interval):
        if not (np.isclose(spec.lo, space.lo) and np.isclose(spec.hi, space.hi)):
            raise ValueError("score interval and label space disagree")
        return GammaDensity(kind="power_law", r_max=spec.r_max, p=spec.p, width=space.width)
    raise ValueError(f"unsupported pairing ({spec.kind}, {type(space).__name__})")


def gamma_empirical(
    spec: ScoreSpec,
    space: LabelSpace,
    model_sampler: Callable,
    inputs: np.ndarray,
    n_bins: int = 128,
    seed: int = 0,
) -> GammaDensity:
    """Monte Carlo estimate of the score-level density.

    For each input row, a model (drawn from a pool of ``model_sampler(rng)``
    draws, assigned uniformly across rows so prediction stays batched) and a
    uniform candidate label are paired; the score of the model's prediction
    against the candidate is recorded.  Discrete scores become atoms;
    continuous scores become a histogram density over [0, r_max].

    Parameters
    ----------
    model_sampler : callable
        ``model_sampler(rng) -> model`` where ``model(X)`` maps a feature
        matrix to predictions.
    inputs : ndarray, shape (n, d)
        Feature sample; one score is drawn per row.
    n_bins : int
        Histogram bins for continuous scores.
    seed : int
        Seed for the candidate-label and model draws.
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2 or inputs.shape[0] == 0:
        raise ValueError("inputs must be a nonempty (n, d) matrix")
    if n_bins < 1:
        raise ValueError("need at least one bin")
    rng = np.random.default_rng(seed)
    n = inputs.shape[0]

    # One model draw per row, batched: draw a pool of models, assign rows to
    # pool entries uniformly, and predict once per distinct model.
    models = [model_sampler(rng) for _ in range(min(64, n))]
    assignment = rng.integers(0, len(models), size=n)
    pred_sets = {}
    for j, m in enumerate(models):
        rows = np.nonzero(assignment == j)[0]
        if rows.size:
            pred_sets[j] = np.asarray(m(inputs[rows]))
    if spec.kind == "zero_one":
        k = space.n_labels
        candidates = rng.integers(0, k, size=n)
        scores = np.empty(n, dtype=float)
        for j, rows_pred in pred_sets.items():
            rows = np.nonzero(assignment == j)[0]
            scores[rows] = (rows_pred != candidates[rows]).astype(float)
        mass0 = float(np.mean(scores == 0.0))
        values, masses = [], []
        if mass0 > 0:
            values.append(0.0)
            masses.append(mass0)
        if mass0 < 1:
            values.append(1.0)
            masses.append(1.0 - mass0)
        return GammaDensity(
            kind="atoms", r_max=1.0, values=np.array(values), masses=np.array(masses)
        )
    candidates = rng.uniform(space.lo, space.hi, size=n)
    scores = np.empty(n, dtype=float)
    for j, rows_pred in pred_sets.items():
        rows = np.nonzero(assignment == j)[0]
        scores[rows] = np.abs(rows_pred.astype(float) - candidates[rows]) ** spec.p
    counts, edges = np.histogram(scores, bins=n_bins, range=(0.0, spec.r_max))
    widths = np.diff(edges)
    dens = counts / (n * widths)
    return GammaDensity(kind="tabulated", r_max=spec.r_max, bin_edges=edges, densities=dens)
