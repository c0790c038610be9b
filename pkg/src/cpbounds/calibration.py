"""Split conformal prediction mechanics.

Turns a multiset of calibration nonconformity scores into a conformal
quantile and prediction sets, and estimates coverage and mean set size by
Monte Carlo.  The quantile is the ascending order statistic whose rank
gives the standard finite-sample coverage guarantee; when the requested
rank exceeds the number of calibration scores the quantile degenerates and
every label is accepted, signalled by the ``FULL_SPACE`` sentinel so that
discrete and continuous label spaces share one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .scores import Discrete, LabelSpace, ScoreSpec, label_measure

__all__ = [
    "FULL_SPACE",
    "CalibrationSet",
    "PredictionSet",
    "n_alpha",
    "empirical_cal_cdf",
    "conformal_quantile",
    "predict_set",
    "TrialDraw",
    "MonteCarloSummary",
    "estimate_coverage_and_size",
]


class _FullSpace:
    """Sentinel meaning 'accept every label'."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "FULL_SPACE"


FULL_SPACE = _FullSpace()


@dataclass(frozen=True, eq=False)
class CalibrationSet:
    """A multiset of calibration scores, kept sorted ascending.

    Duplicates are preserved; every score must lie in [0, r_max].
    """

    scores: np.ndarray
    r_max: float = math.inf

    def __post_init__(self):
        s = np.sort(np.asarray(self.scores, dtype=float))
        if s.size < 1:
            raise ValueError("calibration set must be nonempty")
        if s[0] < 0 or s[-1] > self.r_max:
            raise ValueError(f"scores must lie in [0, {self.r_max}]")
        object.__setattr__(self, "scores", s)

    @property
    def n_cal(self) -> int:
        return int(self.scores.size)


def n_alpha(n_cal: int, alpha: float) -> int:
    """Calibration rank ceil((n_cal + 1) * (1 - alpha)) - 1.

    Computed in exact rational arithmetic (after snapping ``alpha`` to the
    nearest small-denominator rational within 1e-9) so that products that
    are mathematically integers never land on the wrong side of the
    ceiling through floating-point rounding.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if n_cal < 1:
        raise ValueError(f"n_cal must be positive, got {n_cal}")
    a = Fraction(alpha).limit_denominator(10**9)
    return math.ceil((n_cal + 1) * (1 - a)) - 1


def empirical_cal_cdf(cal: CalibrationSet, r: float) -> float:
    """Fraction of calibration scores <= r (right-continuous step function)."""
    return float(np.searchsorted(cal.scores, r, side="right")) / cal.n_cal


def conformal_quantile(cal: CalibrationSet, alpha: float):
    """Conformal quantile: the ascending order statistic of rank n_alpha + 1.

    Equivalently the smallest r at which the empirical calibration c.d.f.
    reaches (n_alpha + 1) / n_cal.  Returns ``FULL_SPACE`` when the rank
    exceeds the number of calibration scores (too little calibration data
    for the requested reliability), in which case every label is accepted.
    """
    rank = n_alpha(cal.n_cal, alpha) + 1
    if rank > cal.n_cal:
        return FULL_SPACE
    return float(cal.scores[rank - 1])


@dataclass(frozen=True)
class PredictionSet:
    """A prediction set with its size under the label-space measure.

    ``kind`` is one of ``"labels"`` (finite subset), ``"interval"``,
    ``"full"`` or ``"empty"``.  ``measure`` is the label count for discrete
    spaces and the length for intervals.
    """

    kind: str
    measure: float
    labels: frozenset | None = None
    lo: float = math.nan
    hi: float = math.nan

    def contains(self, label) -> bool:
        if self.kind == "full":
            return True
        if self.kind == "empty":
            return False
        if self.kind == "labels":
            return label in self.labels
        return bool(self.lo <= label <= self.hi)


def predict_set(spec: ScoreSpec, space: LabelSpace, prediction, q) -> PredictionSet:
    """Build the prediction set of labels scoring no worse than the quantile.

    For the 0-1 score the set is the singleton {prediction} when q < 1 and
    the whole label space otherwise.  For the powered-error score it is the
    interval of targets within q**(1/p) of the prediction, clipped to the
    label interval.  ``q`` may be ``FULL_SPACE``, which always yields the
    whole space.
    """
    total = label_measure(space)
    if q is FULL_SPACE:
        return PredictionSet(kind="full", measure=total)
    q = float(q)
    if isinstance(space, Discrete):
        if spec.kind != "zero_one":
            raise ValueError("discrete label space requires the 0-1 score")
        label = int(prediction)
        if not 0 <= label < space.n_labels:
            raise ValueError(f"prediction {label} outside label space")
        if q < 1.0:
            return PredictionSet(kind="labels", measure=1.0, labels=frozenset([label]))
        return PredictionSet(kind="full", measure=total)
    if spec.kind != "lp_power":
        raise ValueError("interval label space requires the powered-error score")
    f = float(prediction)
    if not space.lo <= f <= space.hi:
        raise ValueError(f"prediction {f} outside [{space.lo}, {space.hi}]")
    half_width = q ** (1.0 / spec.p)
    lo = max(space.lo, f - half_width)
    hi = min(space.hi, f + half_width)
    return PredictionSet(kind="interval", measure=hi - lo, lo=lo, hi=hi)


class TrialDraw(NamedTuple):
    """One simulated trial: calibration scores, a test score, and the
    normalized size of the test prediction set as a function of the
    conformal quantile (which is only known once the trial is calibrated)."""

    cal_scores: np.ndarray
    test_score: float
    normalized_size: Callable


@dataclass(frozen=True)
class MonteCarloSummary:
    """Coverage and mean normalized set size with standard errors."""

    coverage: float
    coverage_se: float
    mean_size_norm: float
    size_se: float
    n_trials: int


def estimate_coverage_and_size(
    trial_sampler: Callable[[np.random.Generator], TrialDraw],
    alpha: float,
    n_trials: int,
    seed: int,
    r_max: float = math.inf,
) -> MonteCarloSummary:
    """Monte Carlo estimate of coverage and mean normalized set size.

    Each trial draws fresh calibration scores and a test score from
    ``trial_sampler``, computes the conformal quantile at miscoverage
    ``alpha``, and records whether the test score is covered together with
    the normalized size of the test prediction set.  Trials use an RNG
    derived from ``(seed, trial index)``, so results are deterministic
    given the seed and independent of evaluation order; aggregation uses
    compensated summation.

    Parameters
    ----------
    trial_sampler : callable
        ``trial_sampler(rng) -> TrialDraw``.
    alpha : float
        Miscoverage level in (0, 1).
    n_trials : int
        Number of independent trials (>= 1).
    seed : int
        Master seed.
    r_max : float
        Upper bound for calibration-score validation.

    Raises
    ------
    RuntimeError
        If the sampler fails; the trial index is attached to the error.
    """
    if n_trials < 1:
        raise ValueError("need at least one trial")
    covered = np.empty(n_trials)
    sizes = np.empty(n_trials)
    for i in range(n_trials):
        rng = np.random.default_rng((seed, i))
        try:
            draw = trial_sampler(rng)
        except Exception as exc:
            raise RuntimeError(f"trial sampler failed at trial {i}") from exc
        cal = CalibrationSet(draw.cal_scores, r_max=r_max)
        q = conformal_quantile(cal, alpha)
        covered[i] = 1.0 if (q is FULL_SPACE or draw.test_score <= q) else 0.0
        sizes[i] = draw.normalized_size(q)
    coverage = math.fsum(covered) / n_trials
    mean_size = math.fsum(sizes) / n_trials
    cov_se = float(np.std(covered, ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0
    size_se = float(np.std(sizes, ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0
    return MonteCarloSummary(
        coverage=coverage,
        coverage_se=cov_se,
        mean_size_norm=mean_size,
        size_se=size_se,
        n_trials=n_trials,
    )
