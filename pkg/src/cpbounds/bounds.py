"""Upper bounds on the expected size of split-conformal prediction sets.

The central quantity is an upper bound on E[|prediction set|] / |label
space| that combines three ingredients: the calibration rank n_alpha, a
training-side score c.d.f. (possibly corrected downward by a
high-probability slack term accounting for the generalization gap of the
learner), and the score-level density.  The bound splits the score range
at the smallest level where the corrected c.d.f. reaches n_alpha / n_cal:
below that level the trivial bound 1 applies, above it a Chernoff factor
exp(-n_cal * d_KL(n_alpha/n_cal || F(r) - slack)) multiplies the density.

Two tail rules are offered for the below-threshold part: ``"endpoint"``
evaluates density-at-threshold times threshold (valid only when the
density is non-decreasing) and ``"integral"`` integrates the density below
the threshold (always valid).  The default is ``"integral"``.

All logarithms are natural.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .calibration import n_alpha
from .cdf_models import CdfEstimate
from .quadrature import adaptive_simpson
from .scores import GammaDensity

__all__ = [
    "binary_kl",
    "beta_slack",
    "mu_slack",
    "SlackSpec",
    "ORACLE_SLACK",
    "r_min",
    "BoundQuery",
    "BoundResult",
    "BOUND_RESULT_FIELDS",
    "expected_set_size_bound",
    "classification_set_size_bound",
    "regression_set_size_bound",
    "binomial_tail_exact",
]


def binary_kl(a, b):
    """KL divergence between Bernoulli(a) and Bernoulli(b), natural log.

    Accepts scalars or arrays (broadcast).  Conventions: 0*log(0/x) = 0,
    and the divergence is +inf when b is 0 or 1 while a differs from it.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any((a < 0) | (a > 1)):
        raise ValueError("first argument must lie in [0, 1]")
    if np.any((b < 0) | (b > 1)):
        raise ValueError("second argument must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(a > 0, a * (np.log(a) - np.log(b)), 0.0)
        t2 = np.where(a < 1, (1.0 - a) * (np.log1p(-a) - np.log1p(-b)), 0.0)
    out = t1 + t2
    return float(out) if out.ndim == 0 else out


def beta_slack(c: float, delta: float, n_tr: int) -> float:
    """High-probability slack coefficient for the training c.d.f. gap.

    Equals sqrt(32 log 2 (2 c log(n_tr) / delta + log(2 sqrt(n_tr) / delta)))
    where ``c`` scales the assumed logarithmic growth of the mutual
    information between the learned parameters and the training data (a
    user-supplied constant, not estimated here).  The sup-norm gap between
    the population and training score c.d.f.s is at most this value divided
    by sqrt(n_tr), with probability 1 - delta.
    """
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if n_tr < 2:
        raise ValueError(f"n_tr must be at least 2, got {n_tr}")
    inner = 2.0 * c * math.log(n_tr) / delta + math.log(2.0 * math.sqrt(n_tr) / delta)
    return math.sqrt(32.0 * math.log(2.0) * inner)


def mu_slack(delta: float, n_tr: int) -> float:
    """Extra slack coefficient when the training c.d.f. is itself sampled.

    Equals sqrt(log(2/delta)/2) + sqrt(4 log(n_tr e / 2)); divided by
    sqrt(n_tr) it uniformly bounds, with probability 1 - delta, the gap
    between the model-averaged training c.d.f. and its one-draw-per-point
    (doubly empirical) estimate.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if n_tr < 1:
        raise ValueError(f"n_tr must be positive, got {n_tr}")
    return math.sqrt(math.log(2.0 / delta) / 2.0) + math.sqrt(4.0 * math.log(n_tr * math.e / 2.0))


@dataclass(frozen=True)
class SlackSpec:
    """How to correct the training c.d.f. inside the bound.

    ``mode`` is one of:

    - ``"oracle"``: no correction (use when the c.d.f. is the population
      one, e.g. a large held-out Monte Carlo estimate); confidence 1.
    - ``"beta"``: subtract beta_slack / sqrt(n_tr); holds with probability
      1 - delta over the training sample.
    - ``"beta_mu"``: subtract (beta_slack + mu_slack) / sqrt(n_tr), for the
      doubly empirical c.d.f.; holds with probability 1 - 2 delta.
    - ``"fixed"``: subtract a user-supplied ``value`` as-is (no
      probabilistic claim attached; confidence reported as 1).
    """

    mode: str
    c: float = 1.0
    delta: float = 0.1
    value: float = 0.0

    def __post_init__(self):
        if self.mode not in ("oracle", "beta", "beta_mu", "fixed"):
            raise ValueError(f"unknown slack mode {self.mode!r}")
        if self.mode in ("beta", "beta_mu") and not 0 < self.delta < 1:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if self.mode == "fixed" and self.value < 0:
            raise ValueError(f"fixed slack must be nonnegative, got {self.value}")

    def resolved(self, n_tr: int) -> float:
        """Slack value subtracted from the c.d.f. (already / sqrt(n_tr))."""
        if self.mode == "oracle":
            return 0.0
        if self.mode == "fixed":
            return self.value
        value = beta_slack(self.c, self.delta, n_tr)
        if self.mode == "beta_mu":
            value += mu_slack(self.delta, n_tr)
        return value / math.sqrt(n_tr)

    @property
    def confidence(self) -> float:
        if self.mode in ("oracle", "fixed"):
            return 1.0
        if self.mode == "beta":
            return 1.0 - self.delta
        return 1.0 - 2.0 * self.delta


ORACLE_SLACK = SlackSpec(mode="oracle")


def r_min(cdf: CdfEstimate, threshold: float, r_max: float) -> float:
    """Smallest score level at which the c.d.f. reaches the threshold.

    Returns ``r_max`` when no level qualifies (the bound's integral part is
    then empty).  Thresholds <= 0 return 0.
    """
    if abs(cdf.r_max - r_max) > 1e-9 * max(1.0, r_max):
        raise ValueError(f"cdf support [0, {cdf.r_max}] does not match r_max {r_max}")
    return cdf.first_reaching(threshold)


BOUND_RESULT_FIELDS = ("normalized_bound", "r_min", "integral_term", "tail_term", "clamped", "confidence")


@dataclass(frozen=True)
class BoundResult:
    """Evaluated set-size bound, normalized by the label-space size."""

    normalized_bound: float
    r_min: float
    integral_term: float
    tail_term: float
    clamped: bool
    confidence: float

    def as_dict(self) -> dict:
        return {
            "normalized_bound": self.normalized_bound,
            "r_min": self.r_min,
            "integral_term": self.integral_term,
            "tail_term": self.tail_term,
            "clamped": self.clamped,
            "confidence": self.confidence,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict())

    def to_csv_row(self) -> str:
        d = self.as_dict()
        return ",".join(str(d[f]) for f in BOUND_RESULT_FIELDS)


@dataclass(frozen=True)
class BoundQuery:
    """All inputs of the generic set-size bound."""

    n_tr: int
    n_cal: int
    alpha: float
    cdf: CdfEstimate
    gamma: GammaDensity
    slack: SlackSpec
    r_max: float
    tail_mode: str = "integral"

    def __post_init__(self):
        if self.n_tr < 1 or self.n_cal < 1:
            raise ValueError("n_tr and n_cal must be positive")
        if self.tail_mode not in ("endpoint", "integral"):
            raise ValueError(f"unknown tail mode {self.tail_mode!r}")
        tol = 1e-9 * max(1.0, self.r_max)
        if abs(self.cdf.r_max - self.r_max) > tol or abs(self.gamma.r_max - self.r_max) > tol:
            raise ValueError("cdf and density must share the score support [0, r_max]")


def _chernoff_factors(target: float, b, n_cal: int):
    """exp(-n_cal * d_KL(target || b)) where valid, else the trivial 1.

    The exponential applies where target < b <= 1; anywhere else (b below
    the target, or outside (0, 1]) the factor is 1.  At b == 1 with
    target < 1 the divergence is infinite and the factor is exactly 0.
    """
    b = np.atleast_1d(np.asarray(b, dtype=float))
    out = np.ones_like(b)
    live = (b > target) & (b > 0.0) & (b <= 1.0)
    if np.any(live):
        kl = np.atleast_1d(binary_kl(target, b[live]))
        out[live] = np.exp(-n_cal * kl)
    return out


def expected_set_size_bound(q: BoundQuery) -> BoundResult:
    """Evaluate the normalized expected set-size bound.

    The integral part sums (atoms) or integrates (continuous densities) the
    Chernoff factor against the score-level density above the threshold
    level; the tail part covers the range below it per ``q.tail_mode``.
    For step c.d.f.s the Chernoff factor is piecewise constant, so each
    piece is integrated with the density's closed-form mass (exact); for
    grid c.d.f.s adaptive Simpson quadrature is used, in the substituted
    variable u = r**(1/p) for the power-law density so that the integrand
    stays bounded near zero.

    Raises
    ------
    QuadratureError
        If quadrature fails to converge within the refinement cap.
    """
    slack_value = q.slack.resolved(q.n_tr)
    na = n_alpha(q.n_cal, q.alpha)
    target = na / q.n_cal
    threshold = target + slack_value
    rmin = q.cdf.first_reaching(threshold)
    gamma = q.gamma
    fuzz = 1e-12 * max(1.0, q.r_max)

    if q.tail_mode == "endpoint" and not gamma.monotone_nondecreasing:
        warnings.warn(
            "endpoint tail rule with a density that is not non-decreasing: "
            "the resulting value may undercount the sub-threshold mass",
            stacklevel=2,
        )

    if gamma.kind == "atoms":
        if q.tail_mode == "integral":
            above = gamma.values > rmin + fuzz
            tail = gamma.mass_upto(rmin, inclusive=True)
        else:
            above = gamma.values >= rmin - fuzz
            tail = gamma.atom_mass_at(rmin) * rmin
        factors = _chernoff_factors(target, q.cdf(gamma.values[above]) - slack_value, q.n_cal)
        integral = float(np.sum(gamma.masses[above] * factors))
    else:
        integral = _integral_term(q, target, slack_value, rmin)
        if q.tail_mode == "integral":
            tail = gamma.mass_upto(rmin)
        else:
            tail = 0.0 if rmin <= 0.0 else float(gamma.density(rmin)) * rmin

    integral, tail = float(integral), float(tail)
    raw = integral + tail
    return BoundResult(
        normalized_bound=min(1.0, raw),
        r_min=float(rmin),
        integral_term=integral,
        tail_term=tail,
        clamped=bool(raw > 1.0),
        confidence=q.slack.confidence,
    )


def _integral_term(q: BoundQuery, target: float, slack_value: float, rmin: float) -> float:
    """Chernoff-weighted density mass over [rmin, r_max] (continuous density)."""
    gamma, cdf = q.gamma, q.cdf
    if rmin >= q.r_max:
        return 0.0
    cuts = [rmin, q.r_max]
    bp = cdf.breakpoints()
    cuts.extend(bp[(bp > rmin) & (bp < q.r_max)])
    if gamma.kind == "tabulated":
        edges = gamma.bin_edges
        cuts.extend(edges[(edges > rmin) & (edges < q.r_max)])
    cuts = np.unique(np.asarray(cuts, dtype=float))

    def chern(r):
        return _chernoff_factors(target, cdf(r) - slack_value, q.n_cal)[0]

    total = 0.0
    for x0, x1 in zip(cuts[:-1], cuts[1:]):
        if x1 - x0 <= 1e-15 * max(1.0, q.r_max):
            continue
        if cdf.kind == "step":
            # The factor is constant on the open piece; the density mass is exact.
            total += chern(0.5 * (x0 + x1)) * gamma.mass_between(x0, x1)
        elif gamma.kind == "power_law":
            inv_p = 1.0 / gamma.p
            scale = 2.0 / gamma.width
            total += adaptive_simpson(
                lambda u: chern(u**gamma.p) * scale, x0**inv_p, x1**inv_p
            )
        else:
            dens = float(gamma.density(0.5 * (x0 + x1)))
            if dens > 0.0:
                total += dens * adaptive_simpson(chern, x0, x1)
    return total


def classification_set_size_bound(
    p_tr_hat: float,
    n_labels: int,
    n_cal: int,
    alpha: float,
    slack: SlackSpec,
    n_tr: int,
) -> BoundResult:
    """Closed-form set-size bound for classification with the 0-1 score.

    When the slack-corrected training accuracy reaches the calibration
    fraction n_alpha / n_cal, the normalized bound is
    1/K + (1 - 1/K) exp(-n_cal d_KL(n_alpha/n_cal || p_tr_hat - slack));
    otherwise the bound is vacuous (1).  This is an independent closed-form
    route: it never calls the generic evaluator.
    """
    if not 0 <= p_tr_hat <= 1:
        raise ValueError(f"training accuracy must lie in [0, 1], got {p_tr_hat}")
    if n_labels < 2:
        raise ValueError(f"need at least 2 labels, got {n_labels}")
    s = slack.resolved(n_tr)
    target = n_alpha(n_cal, alpha) / n_cal
    floor = 1.0 / n_labels
    b = p_tr_hat - s
    if b >= target and b > 0.0:
        exponential = (1.0 - floor) * math.exp(-n_cal * float(binary_kl(target, min(b, 1.0))))
        return BoundResult(
            normalized_bound=floor + exponential,
            r_min=0.0,
            integral_term=exponential,
            tail_term=floor,
            clamped=False,
            confidence=slack.confidence,
        )
    return BoundResult(
        normalized_bound=1.0,
        r_min=1.0,
        integral_term=1.0 - floor,
        tail_term=floor,
        clamped=False,
        confidence=slack.confidence,
    )


def regression_set_size_bound(
    cdf: CdfEstimate,
    p: float,
    lo: float,
    hi: float,
    n_cal: int,
    alpha: float,
    slack: SlackSpec,
    n_tr: int,
    tail_mode: str = "integral",
) -> BoundResult:
    """Set-size bound for powered-error regression on a bounded interval.

    Delegates to the generic evaluator with the closed-form power-law
    density 2 r^{1/p-1} / (p (hi - lo)).  With ``tail_mode="endpoint"`` the
    tail is 2 r_min^{1/p} / (p (hi - lo)); with ``"integral"`` it is
    2 r_min^{1/p} / (hi - lo), larger by the factor p, which keeps the
    bound valid even though this density is decreasing for p > 1.
    """
    if hi <= lo:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    width = hi - lo
    gamma = GammaDensity(kind="power_law", r_max=width**p, p=float(p), width=width)
    query = BoundQuery(
        n_tr=n_tr,
        n_cal=n_cal,
        alpha=alpha,
        cdf=cdf,
        gamma=gamma,
        slack=slack,
        r_max=width**p,
        tail_mode=tail_mode,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # endpoint rule on p > 1 is the caller's choice
        return expected_set_size_bound(query)


def binomial_tail_exact(n: int, prob, k: int):
    """Pr[Binomial(n, prob) <= k], by stable log-space summation.

    ``prob`` may be a scalar or an array.  Terms are accumulated in
    ascending order after a max-shift in log space.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}")
    p = np.asarray(prob, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("prob must lie in [0, 1]")
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    out = np.empty_like(p)
    if k == n:
        out[:] = 1.0
    else:
        out[p == 0.0] = 1.0
        out[p == 1.0] = 0.0
        interior = (p > 0.0) & (p < 1.0)
        if np.any(interior):
            pi = p[interior]
            i = np.arange(k + 1, dtype=float)
            log_comb = (
                math.lgamma(n + 1)
                - np.array([math.lgamma(v + 1) + math.lgamma(n - v + 1) for v in i])
            )
            log_terms = (
                log_comb[:, None] + i[:, None] * np.log(pi)[None, :] + (n - i)[:, None] * np.log1p(-pi)[None, :]
            )
            peak = np.max(log_terms, axis=0)
            shifted = np.sort(np.exp(log_terms - peak[None, :]), axis=0)
            out[interior] = np.minimum(1.0, np.exp(peak + np.log(np.sum(shifted, axis=0))))
    return float(out[0]) if scalar else out
