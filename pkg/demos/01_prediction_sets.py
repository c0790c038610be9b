"""Split conformal prediction from scratch: calibrate, predict, check coverage.

Trains a small logistic ensemble on synthetic 10-class data, turns it into
a set predictor at the 90% reliability level, and verifies the coverage
guarantee by Monte Carlo.  Run with:  python demos/01_prediction_sets.py
"""

import numpy as np

from cpbounds import (
    CalibrationSet,
    Discrete,
    TrainConfig,
    conformal_quantile,
    draw_model,
    estimate_coverage_and_size,
    generate_synthetic,
    nc_score,
    predict_set,
    split_dataset,
    train_classifier,
    zero_one_score,
)
from cpbounds.harness import make_score_trial_sampler

N_LABELS, DIM, SEPARATION = 10, 6, 6.0
ALPHA = 0.1

print("=== 1. data and base predictor ===")
data = generate_synthetic(
    "classification", 900, seed=0, n_labels=N_LABELS, dim=DIM, separation=SEPARATION
)
split = split_dataset(data, n_tr=500, n_cal=200, n_test=200, seed=1)
cfg = TrainConfig(
    kind="logistic", learning_rate=0.3, epochs=60, batch_size=64, ensemble_size=4, seed=2
)
ensemble = train_classifier(split.train, cfg)
print(f"trained {ensemble.size} logistic models on {split.train.n} points")

print("\n=== 2. calibration ===")
spec = zero_one_score()
rng = np.random.default_rng(3)
cal_scores = np.array(
    [
        nc_score(spec, draw_model(ensemble, rng)(split.cal.features[i : i + 1])[0], split.cal.targets[i])
        for i in range(split.cal.n)
    ]
)
cal = CalibrationSet(cal_scores, r_max=spec.r_max)
q = conformal_quantile(cal, ALPHA)
print(f"calibration errors: {int(cal_scores.sum())}/{cal.n_cal}; conformal quantile at alpha={ALPHA}: {q!r}")

print("\n=== 3. prediction sets on a few test points ===")
space = Discrete(N_LABELS)
for i in range(5):
    model = draw_model(ensemble, rng)
    pred = int(model(split.test.features[i : i + 1])[0])
    pset = predict_set(spec, space, pred, q)
    truth = int(split.test.targets[i])
    marker = "covered" if pset.contains(truth) else "MISSED"
    if pset.kind == "labels":
        shown = sorted(pset.labels)
    else:
        shown = f"all {N_LABELS} labels"
    print(f"  x_{i}: predicted {pred}, truth {truth}, set {shown} (size {pset.measure:g}) -> {marker}")

print("\n=== 4. coverage guarantee, Monte Carlo over fresh splits ===")


def data_sampler(rng, n):
    fresh = generate_synthetic(
        "classification", n, seed=int(rng.integers(2**31)), n_labels=N_LABELS, dim=DIM, separation=SEPARATION
    )
    return fresh.features, fresh.targets


sampler = make_score_trial_sampler(ensemble, data_sampler, spec, space, n_cal=200)
summary = estimate_coverage_and_size(sampler, ALPHA, n_trials=3000, seed=4, r_max=1.0)
print(
    f"coverage {summary.coverage:.4f} +/- {summary.coverage_se:.4f} (target >= {1 - ALPHA}); "
    f"mean normalized set size {summary.mean_size_norm:.4f} +/- {summary.size_se:.4f}"
)
