"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Every tolerance is pinned here, taken from the project requirements; the
statistical criteria run at fixed seeds so outcomes are reproducible.
"""

import math
import time

import numpy as np
import pytest
import scipy.stats

from conftest import finite_difference_gradient, gaussian_blob_sampler, regression_sampler
from cpbounds.bounds import (
    ORACLE_SLACK,
    BoundQuery,
    beta_slack,
    binary_kl,
    binomial_tail_exact,
    classification_set_size_bound,
    expected_set_size_bound,
    mu_slack,
    regression_set_size_bound,
)
from cpbounds.calibration import (
    FULL_SPACE,
    CalibrationSet,
    conformal_quantile,
    estimate_coverage_and_size,
    n_alpha,
)
from cpbounds.cdf_models import grid_cdf, population_cdf_mc, step_cdf_from_scores
from cpbounds.dataio import generate_synthetic, split_dataset
from cpbounds.harness import ExperimentConfig, make_score_trial_sampler, run_trial
from cpbounds.learners import (
    TrainConfig,
    flat_params,
    loss_and_gradient,
    train_classifier,
    train_regressor,
    with_params,
)
from cpbounds.scores import (
    Discrete,
    GammaDensity,
    Interval,
    gamma_closed_form,
    lp_power_score,
    zero_one_score,
)


def _line(num: int, name: str, ok: bool, elapsed: float, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[acceptance] criterion {num:2d} {name}: {status} in {elapsed:.1f}s{suffix}")


def _step_cdf_for_accuracy(p_zero: float, grid: int = 1000):
    zeros = int(round(p_zero * grid))
    scores = np.concatenate([np.zeros(zeros), np.ones(grid - zeros)])
    return step_cdf_from_scores(scores, 1.0, "analytic")


def test_criterion_1_closed_form_agreement():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    atoms_cache = {}
    worst = 0.0
    for _ in range(1000):
        p_tr = int(rng.integers(0, 1001)) / 1000.0
        k = int(rng.integers(2, 51))
        n_cal = int(rng.integers(5, 501))
        alpha = float(rng.uniform(0.02, 0.9))
        direct = classification_set_size_bound(p_tr, k, n_cal, alpha, ORACLE_SLACK, 100)
        if k not in atoms_cache:
            atoms_cache[k] = gamma_closed_form(zero_one_score(), Discrete(k))
        q = BoundQuery(
            n_tr=100, n_cal=n_cal, alpha=alpha, cdf=_step_cdf_for_accuracy(p_tr),
            gamma=atoms_cache[k], slack=ORACLE_SLACK, r_max=1.0, tail_mode="integral",
        )
        generic = expected_set_size_bound(q)
        worst = max(worst, abs(direct.normalized_bound - generic.normalized_bound))
    worked = classification_set_size_bound(0.95, 10, 100, 0.1, ORACLE_SLACK, 100).normalized_bound
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and abs(worked - 0.21410) <= 1e-4 and elapsed < 1.0
    _line(1, "closed-form agreement", ok, elapsed, f"max diff {worst:.2e}, worked {worked:.6f}")
    assert worst <= 1e-12
    assert worked == pytest.approx(0.21410, abs=1e-4)
    assert elapsed < 1.0


def test_criterion_2_chernoff_dominance_exhaustive():
    t0 = time.perf_counter()
    violations = 0
    checked = 0
    for n in range(1, 201):
        for k in range(0, n + 1):
            base = k / n
            js = np.arange(1, 100)
            ps = base + js / 100.0
            ps = ps[ps < 1.0]
            if ps.size == 0:
                continue
            chern = np.exp(-n * binary_kl(base, ps))
            tails = binomial_tail_exact(n, ps, k)
            violations += int(np.sum(chern < tails - 1e-12))
            checked += ps.size
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 30.0
    _line(2, "Chernoff dominance", ok, elapsed, f"{checked} grid points, {violations} violations")
    assert violations == 0
    assert elapsed < 30.0


def test_criterion_3_coverage_validity():
    t0 = time.perf_counter()
    data = generate_synthetic("classification", 800, 31, n_labels=10, dim=6, separation=6.0)
    split = split_dataset(data, 500, 200, 100, 32)
    ens = train_classifier(
        split.train,
        TrainConfig(kind="logistic", learning_rate=0.3, epochs=60, batch_size=64, ensemble_size=4, seed=33),
    )
    sampler_data = gaussian_blob_sampler(n_labels=10, dim=6, separation=6.0)
    spec = zero_one_score()
    failures = []
    for n_cal in (50, 100, 200):
        sampler = make_score_trial_sampler(ens, sampler_data, spec, Discrete(10), n_cal)
        for alpha in np.arange(0.05, 0.501, 0.05):
            alpha = round(float(alpha), 2)
            out = estimate_coverage_and_size(sampler, alpha, 5000, seed=n_cal * 100 + int(alpha * 100), r_max=1.0)
            floor = 1.0 - alpha - 3.0 * out.coverage_se
            if out.coverage < floor:
                failures.append((n_cal, alpha, out.coverage, floor))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 600.0
    _line(3, "coverage validity", ok, elapsed, f"30 grid points x 5000 trials, {len(failures)} failures")
    assert not failures, failures
    assert elapsed < 600.0


def test_criterion_4_bound_validity_at_true_f():
    t0 = time.perf_counter()
    failures = []
    checked = 0

    # Classification: fixed ensemble, population c.d.f. from 1e5 held-out draws.
    k = 10
    data = generate_synthetic("classification", 800, 41, n_labels=k, dim=6, separation=6.0)
    split = split_dataset(data, 500, 200, 100, 42)
    cls_ens = train_classifier(
        split.train,
        TrainConfig(kind="logistic", learning_rate=0.3, epochs=60, batch_size=64, ensemble_size=4, seed=43),
    )
    cls_data = gaussian_blob_sampler(n_labels=k, dim=6, separation=6.0)
    spec_cls = zero_one_score()
    members = cls_ens.members
    pop_cdf = population_cdf_mc(
        lambda rng: members[int(rng.integers(0, len(members)))],
        cls_data,
        spec_cls,
        100_000,
        seed=44,
    )
    gamma_cls = gamma_closed_form(spec_cls, Discrete(k))
    for n_cal in (50, 100, 200):
        sampler = make_score_trial_sampler(cls_ens, cls_data, spec_cls, Discrete(k), n_cal)
        for alpha in (0.1, 0.2, 0.3):
            res = expected_set_size_bound(
                BoundQuery(
                    n_tr=500, n_cal=n_cal, alpha=alpha, cdf=pop_cdf, gamma=gamma_cls,
                    slack=ORACLE_SLACK, r_max=1.0, tail_mode="integral",
                )
            )
            if res.normalized_bound >= 1.0:
                continue  # vacuous point
            sim = estimate_coverage_and_size(sampler, alpha, 3000, seed=45 + n_cal + int(alpha * 100), r_max=1.0)
            checked += 1
            if sim.mean_size_norm > res.normalized_bound + 3.0 * sim.size_se:
                failures.append(("cls", n_cal, alpha, sim.mean_size_norm, res.normalized_bound))

    # Regression: tanh MLP ensemble, powered-error score with p = 2.
    reg_params = dict(dim=4, noise=0.05, lo=0.0, hi=1.0, landscape_seed=0)
    data = generate_synthetic("regression", 700, 51, **reg_params)
    split = split_dataset(data, 400, 200, 100, 52)
    reg_ens = train_regressor(
        split.train,
        TrainConfig(kind="mlp", hidden=(16, 16), learning_rate=0.05, epochs=200, batch_size=32, ensemble_size=2, seed=53),
    )
    reg_data = regression_sampler(landscape_seed=0, dim=4, noise=0.05, lo=0.0, hi=1.0)
    spec_reg = lp_power_score(2.0, Interval(0.0, 1.0))
    reg_members = reg_ens.members
    pop_cdf_reg = population_cdf_mc(
        lambda rng: reg_members[int(rng.integers(0, len(reg_members)))],
        reg_data,
        spec_reg,
        100_000,
        seed=54,
    )
    for n_cal in (50, 100, 200):
        sampler = make_score_trial_sampler(reg_ens, reg_data, spec_reg, Interval(0.0, 1.0), n_cal)
        for alpha in (0.1, 0.2, 0.3):
            res = regression_set_size_bound(
                pop_cdf_reg, 2.0, 0.0, 1.0, n_cal, alpha, ORACLE_SLACK, 400, tail_mode="integral"
            )
            if res.normalized_bound >= 1.0:
                continue
            sim = estimate_coverage_and_size(sampler, alpha, 3000, seed=55 + n_cal + int(alpha * 100), r_max=1.0)
            checked += 1
            if sim.mean_size_norm > res.normalized_bound + 3.0 * sim.size_se:
                failures.append(("reg", n_cal, alpha, sim.mean_size_norm, res.normalized_bound))

    elapsed = time.perf_counter() - t0
    ok = not failures and checked > 0 and elapsed < 900.0
    _line(4, "bound validity at true F", ok, elapsed, f"{checked} non-vacuous points, {len(failures)} failures")
    assert checked > 0
    assert not failures, failures
    assert elapsed < 900.0


def _trend_sizes(task: str, n_tr_values, alphas, seeds, n_cal=100):
    """Mean normalized set size per (n_tr, alpha) over pipeline trials."""
    if task == "classification":
        cfg = ExperimentConfig(
            task="classification",
            data_source={"kind": "synthetic", "params": {"n_labels": 10, "dim": 6, "separation": 6.0}},
            train=TrainConfig(kind="logistic", learning_rate=0.3, epochs=60, batch_size=64, ensemble_size=2, seed=0),
            n_tr=tuple(n_tr_values), n_cal=(n_cal,), alphas=tuple(alphas),
            slack_modes=("oracle",), n_trials=1, n_test=1000, seed=0, out_dir="unused",
        )
    else:
        cfg = ExperimentConfig(
            task="regression",
            data_source={"kind": "synthetic", "params": {"dim": 4, "noise": 0.05, "lo": 0.0, "hi": 1.0}},
            train=TrainConfig(kind="mlp", hidden=(16, 16), learning_rate=0.05, epochs=120, batch_size=32, ensemble_size=2, seed=0),
            n_tr=tuple(n_tr_values), n_cal=(n_cal,), alphas=tuple(alphas),
            slack_modes=("oracle",), n_trials=1, n_test=1000, seed=0, out_dir="unused",
            score_p=2.0,
        )
    sizes = {}
    ses = {}
    for n_tr in n_tr_values:
        for alpha in alphas:
            per_seed = [
                run_trial(cfg, (n_tr, n_cal, alpha), 10_000 + s)[0].mean_size_norm for s in seeds
            ]
            sizes[(n_tr, alpha)] = np.asarray(per_seed)
            ses[(n_tr, alpha)] = float(np.std(per_seed, ddof=1) / math.sqrt(len(per_seed)))
    return sizes, ses


def test_criterion_5_trend_reproduction():
    t0 = time.perf_counter()
    seeds = range(20)
    alphas = (0.1, 0.2, 0.3, 0.4, 0.5)
    problems = []
    for task in ("classification", "regression"):
        sizes, ses = _trend_sizes(task, (100, 500), alphas, seeds)
        # Paired one-sided test at a fixed grid point: more training data
        # never hurts the mean set size.
        small = sizes[(100, 0.2)]
        large = sizes[(500, 0.2)]
        stat = scipy.stats.ttest_rel(small, large, alternative="greater")
        if not (stat.pvalue < 0.05 and large.mean() <= small.mean()):
            problems.append((task, "paired", stat.pvalue))
        # Size curves are non-decreasing in the reliability level 1 - alpha
        # (i.e. non-increasing in alpha) up to twice the standard error.
        for n_tr in (100, 500):
            means = [sizes[(n_tr, a)].mean() for a in alphas]
            errs = [ses[(n_tr, a)] for a in alphas]
            for i in range(len(alphas) - 1):
                # moving from alpha[i+1] down to alpha[i] raises 1 - alpha
                if means[i] < means[i + 1] - 2.0 * (errs[i] + errs[i + 1]):
                    problems.append((task, n_tr, alphas[i], means[i], means[i + 1]))
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 1200.0
    _line(5, "trend reproduction", ok, elapsed, f"{len(problems)} problems")
    assert not problems, problems
    assert elapsed < 1200.0


def test_criterion_6_bound_shape_in_n_cal():
    t0 = time.perf_counter()
    n_cals = (100, 1000, 10_000, 100_000)
    cases = []

    # Discrete score-level density (classification, training accuracy 0.95).
    gamma_atoms = gamma_closed_form(zero_one_score(), Discrete(10))
    cdf_atoms = _step_cdf_for_accuracy(0.95)
    cases.append(("atoms", cdf_atoms, gamma_atoms, 1.0))

    # Steep continuous c.d.f.: F(r) = min(1, 0.2 + 4r) from r = 0.
    cdf_steep = grid_cdf([0.0, 0.2, 1.0], [0.2, 1.0, 1.0], 1.0)
    gamma_flat = GammaDensity(kind="power_law", r_max=1.0, p=1.0, width=1.0)
    cases.append(("steep-grid", cdf_steep, gamma_flat, 1.0))

    problems = []
    for name, cdf, gamma, r_max in cases:
        results = [
            expected_set_size_bound(
                BoundQuery(
                    n_tr=100, n_cal=nc, alpha=0.1, cdf=cdf, gamma=gamma,
                    slack=ORACLE_SLACK, r_max=r_max, tail_mode="integral",
                )
            )
            for nc in n_cals
        ]
        bounds = [r.normalized_bound for r in results]
        informative = [b for b in bounds if b < 1.0]
        if any(b2 > b1 + 1e-12 for b1, b2 in zip(informative, informative[1:])):
            problems.append((name, "not non-increasing", bounds))
        final = results[-1]
        if abs(final.normalized_bound - final.tail_term) > 1e-3:
            problems.append((name, "limit gap", final.normalized_bound, final.tail_term))
    elapsed = time.perf_counter() - t0
    ok = not problems
    _line(6, "bound shape in n_cal", ok, elapsed, f"{len(problems)} problems")
    assert not problems, problems


def test_criterion_7_quantile_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    mismatches = 0
    full_space_seen = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 31))
        scores = np.round(rng.uniform(0.0, 1.0, size=n), 1)  # heavy ties
        alpha = float(rng.uniform(0.01, 0.99))
        got = conformal_quantile(CalibrationSet(scores, 1.0), alpha)
        na = n_alpha(n, alpha)
        if na + 1 > n:
            full_space_seen += 1
            if got is not FULL_SPACE:
                mismatches += 1
        else:
            want = np.sort(scores)[na]
            if got is FULL_SPACE or got != want:
                mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and full_space_seen > 0
    _line(7, "quantile oracle", ok, elapsed, f"{full_space_seen} degenerate cases, {mismatches} mismatches")
    assert mismatches == 0
    assert full_space_seen > 0


def test_criterion_8_quadrature_accuracy():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(50):
        knots = np.sort(rng.uniform(0.05, 0.95, size=int(rng.integers(2, 6))))
        xs = np.concatenate([[0.0], knots, [1.0]])
        raw = np.sort(rng.uniform(0.0, 1.0, size=xs.size - 1))
        ys = np.concatenate([[0.0], raw])
        ys[-1] = 1.0
        cdf = grid_cdf(xs, ys, 1.0)
        p = float(rng.uniform(1.0, 3.0))
        n_cal = int(rng.integers(40, 300))
        alpha = float(rng.uniform(0.05, 0.4))
        res = regression_set_size_bound(cdf, p, 0.0, 1.0, n_cal, alpha, ORACLE_SLACK, 100, "integral")
        if res.r_min >= 1.0:
            continue
        # Independent 1e6-point trapezoid of the written-out integrand.
        target = n_alpha(n_cal, alpha) / n_cal
        rs = np.linspace(res.r_min, 1.0, 1_000_001)
        b = np.interp(rs, xs, ys)
        factor = np.ones_like(rs)
        live = (b > target) & (b < 1.0)
        bb = b[live]
        factor[live] = np.exp(
            -n_cal * (target * np.log(target / bb) + (1.0 - target) * np.log((1.0 - target) / (1.0 - bb)))
        )
        factor[b >= 1.0] = 0.0
        factor[b <= target] = 1.0
        with np.errstate(divide="ignore"):
            dens = 2.0 * rs ** (1.0 / p - 1.0) / p
        if res.r_min == 0.0:
            dens[0] = 0.0  # endpoint is integrable; trapezoid ignores it
        oracle = float(np.trapezoid(factor * dens, rs))
        rel = abs(res.integral_term - oracle) / max(abs(oracle), 1e-12)
        worst = max(worst, rel)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-4
    _line(8, "quadrature accuracy", ok, elapsed, f"worst relative error {worst:.2e}")
    assert worst <= 1e-4


def test_criterion_9_learner_checks():
    t0 = time.perf_counter()
    from test_learners import random_logistic, random_mlp

    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(900 + seed)
        model = random_logistic(rng)
        X = rng.standard_normal((10, 5))
        y = rng.integers(0, 4, size=10)
        _, grad = loss_and_gradient(model, X, y)
        fd = finite_difference_gradient(lambda v: loss_and_gradient(with_params(model, v), X, y)[0], flat_params(model))
        worst = max(worst, float(np.max(np.abs(grad - fd)) / max(1.0, np.max(np.abs(grad)))))

        rng = np.random.default_rng(950 + seed)
        model = random_mlp(rng)
        X = rng.standard_normal((8, 3))
        yr = rng.uniform(0.0, 1.0, size=8)
        _, grad = loss_and_gradient(model, X, yr)
        fd = finite_difference_gradient(lambda v: loss_and_gradient(with_params(model, v), X, yr)[0], flat_params(model))
        worst = max(worst, float(np.max(np.abs(grad - fd)) / max(1.0, np.max(np.abs(grad)))))

    data = generate_synthetic("classification", 150, 91, n_labels=5, dim=4, separation=5.0)
    cfg = TrainConfig(kind="logistic", learning_rate=0.2, epochs=25, batch_size=32, ensemble_size=2, seed=92)
    ens_a = train_classifier(data, cfg)
    ens_b = train_classifier(data, cfg)
    reproducible = all(
        np.array_equal(a.weights, b.weights) and np.array_equal(a.bias, b.bias)
        for a, b in zip(ens_a.members, ens_b.members)
    )
    rdata = generate_synthetic("regression", 120, 93, dim=3, noise=0.05, lo=0.0, hi=1.0)
    rcfg = TrainConfig(kind="mlp", hidden=(8,), learning_rate=0.05, epochs=25, batch_size=30, ensemble_size=1, seed=94)
    ra = train_regressor(rdata, rcfg).members[0]
    rb = train_regressor(rdata, rcfg).members[0]
    reproducible = reproducible and all(np.array_equal(x, y) for x, y in zip(ra.weights, rb.weights))

    elapsed = time.perf_counter() - t0
    ok = worst < 1e-5 and reproducible
    _line(9, "learner checks", ok, elapsed, f"worst gradient error {worst:.2e}, reproducible={reproducible}")
    assert worst < 1e-5
    assert reproducible


def test_criterion_10_formula_spot_values():
    t0 = time.perf_counter()
    beta = beta_slack(1.0, 0.1, 100)
    mu = mu_slack(0.1, 100)
    elapsed = time.perf_counter() - t0
    ok = abs(beta - 46.481) <= 0.01 and abs(mu - 5.6565) <= 0.001
    _line(10, "formula spot values", ok, elapsed, f"beta={beta:.4f}, mu={mu:.5f}")
    assert beta == pytest.approx(46.481, abs=0.01)
    assert mu == pytest.approx(5.6565, abs=0.001)
