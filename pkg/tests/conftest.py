import numpy as np
import pytest

from cpbounds.dataio import generate_synthetic, split_dataset
from cpbounds.learners import TrainConfig, train_classifier, train_regressor


def gaussian_blob_sampler(n_labels=10, dim=6, separation=6.0):
    """Batch sampler matching the synthetic classification generator."""
    angles = 2.0 * np.pi * np.arange(n_labels) / n_labels
    means = np.zeros((n_labels, dim))
    means[:, 0] = separation * np.cos(angles)
    means[:, 1] = separation * np.sin(angles)

    def sampler(rng, n):
        labels = rng.integers(0, n_labels, size=n)
        return rng.standard_normal((n, dim)) + means[labels], labels

    return sampler


def regression_sampler(landscape_seed=0, dim=4, noise=0.05, lo=0.0, hi=1.0):
    """Batch sampler drawing from the synthetic regression distribution."""
    from cpbounds.dataio import regression_landscape

    w1, w2 = regression_landscape(dim, landscape_seed)
    span = hi - lo

    def sampler(rng, n):
        X = rng.uniform(-1.0, 1.0, size=(n, dim))
        raw = np.sin(2.0 * X @ w1) + 0.5 * np.cos(np.pi * X @ w2)
        y = (lo + hi) / 2.0 + 0.25 * span * raw + noise * span * rng.standard_normal(n)
        return X, np.clip(y, lo, hi)

    return sampler


def finite_difference_gradient(loss_fn, params, eps=1e-6):
    """Central finite differences of a scalar function of a flat vector."""
    grad = np.zeros_like(params)
    for i in range(params.size):
        up = params.copy()
        up[i] += eps
        down = params.copy()
        down[i] -= eps
        grad[i] = (loss_fn(up) - loss_fn(down)) / (2.0 * eps)
    return grad


@pytest.fixture(scope="session")
def small_classifier_ensemble():
    data = generate_synthetic("classification", 800, 5, n_labels=10, dim=6, separation=6.0)
    split = split_dataset(data, 500, 200, 100, 6)
    cfg = TrainConfig(kind="logistic", learning_rate=0.3, epochs=60, batch_size=64, ensemble_size=4, seed=3)
    return train_classifier(split.train, cfg), split


@pytest.fixture(scope="session")
def small_regressor_ensemble():
    data = generate_synthetic("regression", 700, 9, dim=4, noise=0.05, lo=0.0, hi=1.0)
    split = split_dataset(data, 400, 200, 100, 10)
    cfg = TrainConfig(
        kind="mlp", hidden=(16, 16), learning_rate=0.05, epochs=150, batch_size=32, ensemble_size=2, seed=4
    )
    return train_regressor(split.train, cfg), split
