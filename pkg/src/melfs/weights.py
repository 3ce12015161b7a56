"""Shared feature-importance weights learned from accuracy changes.

Every evaluation compares a particle's new mask with its previous one.
Features that were switched on get credited with the accuracy change,
features that were switched off get debited with it (signs flip when the
accuracy dropped). Strictly positive weights then drive a roulette sampler.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

SubsetPolicy = Literal["uniform", "bernoulli"]


@dataclass(frozen=True)
class MaskDelta:
    gained: np.ndarray
    dropped: np.ndarray

    @classmethod
    def between(cls, prev_mask: np.ndarray, new_mask: np.ndarray) -> "MaskDelta":
        prev_mask = np.asarray(prev_mask, dtype=bool)
        new_mask = np.asarray(new_mask, dtype=bool)
        return cls(np.flatnonzero(new_mask & ~prev_mask), np.flatnonzero(prev_mask & ~new_mask))


class FeatureWeights:
    """Per-feature importance vector, zero at start, never resized."""

    def __init__(self, n_features: int):
        if n_features < 1:
            raise ValueError("n_features must be >= 1")
        self.w = np.zeros(n_features, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.w)

    def snapshot(self) -> np.ndarray:
        return self.w.copy()

    def update(self, delta: MaskDelta, prev_acc: float, new_acc: float) -> "FeatureWeights":
        update_weights(self, delta, prev_acc, new_acc)
        return self


def update_weights(w: FeatureWeights, delta: MaskDelta, prev_acc: float, new_acc: float) -> FeatureWeights:
    """Credit gained and debit dropped features by the accuracy change (in place).

    A zero change leaves every weight untouched.
    """
    change = new_acc - prev_acc
    if change == 0:
        return w
    # gained += change and dropped -= change covers both signs of the change
    w.w[delta.gained] += change
    w.w[delta.dropped] -= change
    return w


def positive_mass(w) -> float:
    """Sum of the strictly positive weights."""
    v = w.w if isinstance(w, FeatureWeights) else np.asarray(w, dtype=np.float64)
    return float(v[v > 0].sum())


def selection_probabilities(w) -> np.ndarray:
    """Weight over positive mass for positive weights, zero elsewhere."""
    v = w.w if isinstance(w, FeatureWeights) else np.asarray(w, dtype=np.float64)
    delta = positive_mass(v)
    if delta <= 0:
        raise ValueError("no feature has a positive weight")
    return np.where(v > 0, v, 0.0) / delta


def roulette_sample(w, rng: np.random.Generator, policy: SubsetPolicy = "uniform",
                    bernoulli_scale: float = 0.5) -> np.ndarray:
    """Draw a nonempty feature mask favouring heavily weighted features.

    With no positive weight at all a single uniformly random feature is
    returned. Otherwise only positive-weight features are eligible:

    ``"uniform"``
        subset size ``m`` is uniform on ``1..P`` (``P`` eligible features)
        and ``m`` features are drawn one after another without replacement,
        each draw proportional to weight among those still available.
    ``"bernoulli"``
        each eligible feature is kept independently with probability
        ``min(1, rho * P * bernoulli_scale)``; an empty draw falls back to
        one weight-proportional pick.
    """
    v = w.w if isinstance(w, FeatureWeights) else np.asarray(w, dtype=np.float64)
    mask = np.zeros(len(v), dtype=bool)
    eligible = np.flatnonzero(v > 0)
    if eligible.size == 0:
        mask[rng.integers(len(v))] = True
        return mask
    weights = v[eligible]
    if policy == "uniform":
        m = int(rng.integers(1, eligible.size + 1))
        # exponential race: the m smallest E_i / w_i are distributed exactly
        # like m successive weight-proportional draws without replacement
        keys = rng.standard_exponential(eligible.size) / weights
        chosen = eligible[np.argsort(keys, kind="stable")[:m]]
    elif policy == "bernoulli":
        rho = weights / weights.sum()
        keep = rng.random(eligible.size) < np.minimum(1.0, rho * eligible.size * bernoulli_scale)
        chosen = eligible[keep]
        if chosen.size == 0:
            cdf = np.cumsum(rho)
            pick = min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")), eligible.size - 1)
            chosen = eligible[[pick]]
    else:
        raise ValueError(f"unknown subset policy {policy!r}")
    mask[chosen] = True
    return mask


def top_k(w, k: int) -> list[tuple[int, float]]:
    """The ``k`` largest weights as ``(index, weight)``, ties to the lower index."""
    v = w.w if isinstance(w, FeatureWeights) else np.asarray(w, dtype=np.float64)
    order = np.argsort(-v, kind="stable")[:k]
    return [(int(i), float(v[i])) for i in order]
