"""Synthetic datasets with known informative features."""
from __future__ import annotations

import numpy as np

from .dataset import Dataset


def make_planted(
    n_samples: int = 200,
    n_features: int = 500,
    n_informative: int = 5,
    noise: float = 0.5,
    seed: int = 0,
) -> tuple[Dataset, np.ndarray]:
    """Binary problem whose label depends additively on a few hidden columns.

    All columns are standard normal. The label is the sign of the sum of the
    informative columns plus Gaussian noise of scale ``noise``, so every
    informative column is weakly useful alone and strongly useful together.
    Returns the dataset and the sorted informative column indices.
    """
    if not 1 <= n_informative <= n_features:
        raise ValueError("n_informative must lie in [1, n_features]")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_samples, n_features))
    planted = np.sort(rng.choice(n_features, size=n_informative, replace=False))
    score = X[:, planted].sum(axis=1) + noise * rng.standard_normal(n_samples)
    y = (score > 0).astype(np.int64)
    return Dataset(X, y, label_names=("neg", "pos"), name=f"planted{n_informative}x{n_features}"), planted
