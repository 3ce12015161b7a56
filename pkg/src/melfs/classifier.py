"""Masked k-nearest-neighbour classification and cross-validated accuracy.

Tie rules are fixed so that every run is bit-reproducible:

* equal distances go to the lower training-row index (stable sort), and
* equal vote counts go to the smallest class id.

Distances are squared Euclidean; ranking is unaffected by the missing root.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import Dataset, FoldPlan


class EmptyMaskError(ValueError):
    """A feature mask with no selected feature reached the classifier."""


@dataclass(frozen=True)
class EvalOutcome:
    accuracy: float
    n_selected: int
    fitness: float

    @property
    def error_rate(self) -> float:
        return 1.0 - self.accuracy


def as_mask(mask, n_features: int) -> np.ndarray:
    """Coerce ``mask`` to a boolean vector of length ``n_features``."""
    m = np.asarray(mask)
    if m.dtype != bool:
        m = m != 0
    if m.shape != (n_features,):
        raise ValueError(f"mask has shape {m.shape}, expected ({n_features},)")
    if not m.any():
        raise EmptyMaskError("feature mask selects no features")
    return m


def _vote(neighbour_labels: np.ndarray, n_classes: int) -> np.ndarray:
    # argmax returns the first maximum, i.e. the smallest class id on ties
    n = neighbour_labels.shape[0]
    flat = (np.arange(n)[:, None] * n_classes + neighbour_labels).ravel()
    counts = np.bincount(flat, minlength=n * n_classes).reshape(n, n_classes)
    return counts.argmax(axis=1)


def _predict_from_distances(d: np.ndarray, train_labels: np.ndarray, k: int, n_classes: int) -> np.ndarray:
    k = min(k, d.shape[1])
    nearest = np.argsort(d, axis=1, kind="stable")[:, :k]
    return _vote(train_labels[nearest], n_classes)


def knn_predict(train_rows, train_labels, query, mask, k: int = 3) -> int:
    """Predict the class of a single ``query`` row from masked coordinates."""
    train_rows = np.asarray(train_rows, dtype=np.float64)
    train_labels = np.asarray(train_labels, dtype=np.int64)
    if k < 1:
        raise ValueError("k must be >= 1")
    if train_rows.shape[0] == 0:
        raise ValueError("training set is empty")
    m = as_mask(mask, train_rows.shape[1])
    q = np.asarray(query, dtype=np.float64)[m][None, :]
    d = cdist(q, train_rows[:, m], "sqeuclidean")
    return int(_predict_from_distances(d, train_labels, k, int(train_labels.max()) + 1)[0])


def cv_predictions(ds: Dataset, mask, plan: FoldPlan, k_nn: int = 3) -> np.ndarray:
    """Out-of-fold prediction for every row of ``ds``."""
    if plan.n_samples != ds.n_samples:
        raise ValueError("fold plan was built for a different dataset")
    if k_nn < 1:
        raise ValueError("k_nn must be >= 1")
    m = as_mask(mask, ds.n_features)
    Xm = ds.samples[:, m]
    d = cdist(Xm, Xm, "sqeuclidean")
    n_classes = int(ds.class_ids[-1]) + 1
    pred = np.empty(ds.n_samples, dtype=np.int64)
    for train, test in plan.folds():
        pred[test] = _predict_from_distances(d[np.ix_(test, train)], ds.labels[train], k_nn, n_classes)
    return pred


def cv_accuracy(ds: Dataset, mask, plan: FoldPlan, k_nn: int = 3) -> float:
    """Pooled cross-validated accuracy: total correct over all rows / n."""
    pred = cv_predictions(ds, mask, plan, k_nn)
    return int(np.count_nonzero(pred == ds.labels)) / ds.n_samples
