"""Tabular classification data and stratified cross-validation fold plans."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Literal

import numpy as np


class DataFormatError(ValueError):
    """Raised when a data file cannot be parsed into a Dataset."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable sample matrix with dense integer class labels.

    ``samples`` is (n_samples, n_features); ``labels`` holds class ids
    ``0..C-1``. ``label_names`` maps each class id back to the raw label.
    """

    samples: np.ndarray
    labels: np.ndarray
    label_names: tuple[str, ...] = ()
    name: str = "dataset"
    class_ids: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        X = np.asarray(self.samples, dtype=np.float64)
        y = np.asarray(self.labels)
        if X.ndim != 2:
            raise ValueError(f"samples must be 2-D, got shape {X.shape}")
        if y.ndim != 1 or len(y) != X.shape[0]:
            raise ValueError(f"labels length {len(y)} does not match {X.shape[0]} samples")
        if X.shape[1] < 1:
            raise ValueError("dataset needs at least one feature")
        if X.shape[0] < 1:
            raise ValueError("dataset needs at least one sample")
        if not np.all(np.isfinite(X)):
            raise ValueError("all feature values must be finite")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise ValueError("labels must be integer class ids")
        y = y.astype(np.int64)
        if y.min() < 0:
            raise ValueError("class ids must be non-negative")
        object.__setattr__(self, "samples", _frozen(X))
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "class_ids", _frozen(np.unique(y)))

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_features(self) -> int:
        return self.samples.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_ids)

    def class_counts(self) -> dict[int, int]:
        ids, counts = np.unique(self.labels, return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts)}


def load_csv(
    path: str | Path,
    label_column: Literal["first", "last"] = "last",
    header: bool = False,
) -> Dataset:
    """Read a comma-separated file with one label column.

    Labels are re-encoded as ``0..C-1`` in order of first appearance.
    Feature column order is preserved.
    """
    if label_column not in ("first", "last"):
        raise ValueError(f"label_column must be 'first' or 'last', got {label_column!r}")
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if r and any(c.strip() for c in r)]
    if header and rows:
        rows = rows[1:]
    if not rows:
        raise DataFormatError(f"{path}: no data rows")

    width = len(rows[0][1])
    if width < 2:
        raise DataFormatError(f"{path}: row {rows[0][0]} has {width} column(s); need a label and at least one feature")

    codes: dict[str, int] = {}
    features = np.empty((len(rows), width - 1), dtype=np.float64)
    labels = np.empty(len(rows), dtype=np.int64)
    for r, (lineno, cells) in enumerate(rows):
        if len(cells) != width:
            raise DataFormatError(f"{path}: row {lineno} has {len(cells)} columns, expected {width}")
        if label_column == "last":
            raw_label, raw_feats = cells[-1], cells[:-1]
        else:
            raw_label, raw_feats = cells[0], cells[1:]
        raw_label = raw_label.strip()
        if not raw_label:
            raise DataFormatError(f"{path}: row {lineno} has an empty label")
        labels[r] = codes.setdefault(raw_label, len(codes))
        for c, cell in enumerate(raw_feats):
            try:
                features[r, c] = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {lineno}, feature column {c}: non-numeric value {cell!r}"
                ) from None
    if not np.all(np.isfinite(features)):
        bad = int(np.argwhere(~np.isfinite(features))[0, 0])
        raise DataFormatError(f"{path}: row {rows[bad][0]} contains a non-finite value")
    return Dataset(features, labels, label_names=tuple(codes), name=path.stem)


def save_csv(ds: Dataset, path: str | Path) -> None:
    """Write ``ds`` as headerless CSV with the label in the last column."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row, y in zip(ds.samples, ds.labels):
            label = ds.label_names[y] if ds.label_names else str(int(y))
            w.writerow([repr(float(v)) for v in row] + [label])


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Fold index per sample row, fixed for the lifetime of a run."""

    k: int
    assignment: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        a = np.asarray(self.assignment, dtype=np.int64)
        if self.k < 2:
            raise ValueError("need at least 2 folds")
        if a.ndim != 1 or a.size == 0:
            raise ValueError("assignment must be a nonempty 1-D array")
        if a.min() < 0 or a.max() >= self.k:
            raise ValueError("fold indices must lie in [0, k)")
        if len(np.unique(a)) != self.k:
            raise ValueError("every fold must be nonempty")
        object.__setattr__(self, "assignment", _frozen(a))

    @property
    def n_samples(self) -> int:
        return len(self.assignment)

    def folds(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Yield ``(train_idx, test_idx)`` in ascending fold order."""
        for f in range(self.k):
            test = self.assignment == f
            yield np.flatnonzero(~test), np.flatnonzero(test)


def stratified_kfold(ds: Dataset, k: int, seed: int) -> FoldPlan:
    """Shuffle each class, then deal its rows round-robin across folds.

    The dealing position carries over from one class to the next, which
    keeps total fold sizes within one of each other as well.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > ds.n_samples:
        raise ValueError(f"k={k} exceeds the number of samples ({ds.n_samples})")
    rng = np.random.default_rng(seed)
    assignment = np.empty(ds.n_samples, dtype=np.int64)
    offset = 0
    for c in ds.class_ids:
        idx = np.flatnonzero(ds.labels == c)
        idx = idx[rng.permutation(len(idx))]
        assignment[idx] = (offset + np.arange(len(idx))) % k
        offset = (offset + len(idx)) % k
    return FoldPlan(k=k, assignment=assignment, seed=seed)


def minmax_scale(ds: Dataset) -> Dataset:
    """Map every feature column onto [0, 1]; constant columns become 0."""
    X = ds.samples
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (X - lo) / safe, 0.0)
    return Dataset(scaled, ds.labels, label_names=ds.label_names, name=ds.name)
