"""Prediction scoring: accuracy, confusion matrices, and summaries."""

from dataclasses import dataclass

import numpy as np


def accuracy(predictions, labels):
    """Fraction of positions where predictions == labels."""
    preds = np.asarray(predictions)
    labs = np.asarray(labels)
    if preds.shape != labs.shape:
        raise ValueError(f"length mismatch: {preds.shape} vs {labs.shape}")
    if preds.size == 0:
        raise ValueError("cannot score an empty prediction set")
    return float(np.mean(preds == labs))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with true class on rows, predicted class on columns."""

    counts: np.ndarray  # (K, K) int64
    labels: object      # LabelSet

    def __post_init__(self):
        c = self.counts
        k = self.labels.k
        if c.shape != (k, k):
            raise ValueError(f"counts shape {c.shape} != ({k}, {k})")
        if (c < 0).any():
            raise ValueError("confusion counts must be non-negative")
        c.flags.writeable = False

    @property
    def total(self):
        return int(self.counts.sum())

    def accuracy(self):
        return float(np.trace(self.counts)) / self.total


def confusion(predictions, labels, label_set):
    """Count (true, predicted) pairs into a ConfusionMatrix."""
    preds = np.asarray(predictions, dtype=np.int64)
    labs = np.asarray(labels, dtype=np.int64)
    if preds.shape != labs.shape:
        raise ValueError(f"length mismatch: {preds.shape} vs {labs.shape}")
    k = label_set.k
    for name, arr in (("predictions", preds), ("labels", labs)):
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise ValueError(
                f"{name} contain class ids outside [0, {k}): "
                f"min {arr.min()}, max {arr.max()}")
    mat = np.zeros((k, k), dtype=np.int64)
    np.add.at(mat, (labs, preds), 1)
    return ConfusionMatrix(counts=mat, labels=label_set)


def _counts_of(m):
    return m.counts if isinstance(m, ConfusionMatrix) else np.asarray(m)


def normalize_rows(m):
    """Row-normalize counts; all-zero rows stay zero.

    Returns (float64 matrix, list of zero-row indices) so reports can flag
    classes that were never evaluated.
    """
    mat = _counts_of(m).astype(np.float64)
    sums = mat.sum(axis=1, keepdims=True)
    zero_rows = [i for i in range(mat.shape[0]) if sums[i, 0] == 0]
    safe = np.where(sums == 0, 1.0, sums)
    return mat / safe, zero_rows


def top_confusions(m, k):
    """Worst off-diagonal confusions as (true name, predicted name, rate).

    Rates are row-normalized; sorted by rate descending, ties by (row,
    col) ascending; zero rates are never reported; at most k entries.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    rates, _ = normalize_rows(m)
    n = rates.shape[0]
    entries = []
    for i in range(n):
        for j in range(n):
            if i != j and rates[i, j] > 0:
                entries.append((i, j, float(rates[i, j])))
    entries.sort(key=lambda e: (-e[2], e[0], e[1]))
    if isinstance(m, ConfusionMatrix):
        return [(m.labels.name_of(i), m.labels.name_of(j), r)
                for i, j, r in entries[:k]]
    return entries[:k]
