"""Score-level densities and training c.d.f.s, closed form vs Monte Carlo.

Shows the two ingredients the set-size bound consumes: the density of
score levels under a uniform candidate label (closed form and empirical)
and the strict-counting training c.d.f. with its generalization gap.
Run with:  python demos/04_score_densities_and_cdfs.py
"""

import numpy as np

from cpbounds import (
    Discrete,
    Interval,
    TrainConfig,
    gamma_closed_form,
    gamma_empirical,
    generalization_gap,
    generate_synthetic,
    lp_power_score,
    population_cdf_mc,
    regression_landscape,
    split_dataset,
    train_regressor,
    training_cdf,
    zero_one_score,
)

print("=== 1. score-level density, classification ===")
atoms = gamma_closed_form(zero_one_score(), Discrete(10))
print(f"closed form: mass {atoms.masses[0]:.2f} at score 0, {atoms.masses[1]:.2f} at score 1")
inputs = np.random.default_rng(0).standard_normal((50_000, 4))
silly_model = lambda rng: (lambda X: np.zeros(X.shape[0], dtype=int))
emp = gamma_empirical(zero_one_score(), Discrete(10), silly_model, inputs, seed=1)
print(f"empirical (any classifier, uniform candidate labels): mass at 0 = {emp.masses[0]:.4f}")
print("the density is model-independent: the candidate label matches 1/K of the time.")

print("\n=== 2. score-level density, regression ===")
spec = lp_power_score(2.0, Interval(0.0, 1.0))
env = gamma_closed_form(spec, Interval(0.0, 1.0))
print("closed form 2 r^(1/p-1) / (p width) is an upper envelope (it ignores")
print("clipping at the interval edges); it decreases in r for p > 1:")
for r in (0.01, 0.09, 0.25, 0.81):
    print(f"  density({r:.2f}) = {env.density(r):.3f}")
print(f"monotone non-decreasing flag: {env.monotone_nondecreasing} (computed, not assumed)")

print("\n=== 3. training c.d.f.s and the generalization gap ===")
params = dict(dim=4, noise=0.05, lo=0.0, hi=1.0, landscape_seed=0)
data = generate_synthetic("regression", 700, seed=2, **params)
split = split_dataset(data, n_tr=400, n_cal=200, n_test=100, seed=3)
ens = train_regressor(
    split.train,
    TrainConfig(kind="mlp", hidden=(16, 16), learning_rate=0.05, epochs=150, batch_size=32,
                ensemble_size=2, seed=4),
)
avg = training_cdf(ens.members, split.train.features, split.train.targets, spec, "averaged")

w1, w2 = regression_landscape(4, 0)


def data_sampler(rng, n):
    X = rng.uniform(-1.0, 1.0, size=(n, 4))
    raw = np.sin(2.0 * X @ w1) + 0.5 * np.cos(np.pi * X @ w2)
    y = 0.5 + 0.25 * raw + 0.05 * rng.standard_normal(n)
    return X, np.clip(y, 0.0, 1.0)


members = ens.members
pop = population_cdf_mc(
    lambda rng: members[int(rng.integers(0, len(members)))], data_sampler, spec, 100_000, seed=5
)
print("score level r    train F(r)    population F(r)")
for r in (0.001, 0.005, 0.02, 0.1):
    print(f"  {r:<13g}  {avg(r):<12.4f}  {pop(r):.4f}")
gap = generalization_gap(pop, avg, np.linspace(0.0, 1.0, 512))
print(f"sup-norm gap between the two: {gap:.4f}")
print("the training c.d.f. sits above the population one (the net fits its")
print("own training points better); the bound subtracts a slack for exactly")
print("this optimism when it is fed the training-side estimate.")
