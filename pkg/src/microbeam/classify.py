"""1-nearest-neighbour classification of fused features and confusion matrices."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, StructuralError

METRICS = ("euclidean", "manhattan")


@dataclass(frozen=True)
class NnModel:
    """Stored training features (one row each) with their labels."""

    features: np.ndarray
    labels: np.ndarray
    metric: str = "euclidean"

    def __post_init__(self):
        features = np.atleast_2d(np.asarray(self.features, dtype=float))
        labels = np.asarray(self.labels, dtype=int).ravel()
        if features.shape[0] == 0 or features.shape[0] != labels.shape[0]:
            raise StructuralError("need a non-empty feature matrix with one label per row")
        if self.metric not in METRICS:
            raise DomainError(f"metric must be one of {METRICS}, got {self.metric!r}")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_features(cls, features: Sequence, metric: str = "euclidean") -> "NnModel":
        """Build from a list of labelled :class:`FusedFeature`."""
        return cls(np.stack([f.values for f in features]), [f.label for f in features], metric)

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)


def distances(model: NnModel, query) -> np.ndarray:
    q = np.asarray(getattr(query, "values", query), dtype=float).ravel()
    if q.shape[0] != model.features.shape[1]:
        raise StructuralError(f"feature length {q.shape[0]} != model length {model.features.shape[1]}")
    diff = model.features - q
    if model.metric == "manhattan":
        return np.abs(diff).sum(axis=1)
    return np.sqrt((diff * diff).sum(axis=1))


def predict(model: NnModel, feature) -> int:
    """Label of the nearest stored feature; exact ties go to the lowest index."""
    return int(model.labels[int(np.argmin(distances(model, feature)))])


def predict_many(model: NnModel, features: Sequence) -> np.ndarray:
    return np.array([predict(model, f) for f in features], dtype=int)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts and column-normalized percentages; rows are predicted, columns actual."""

    classes: tuple
    counts: np.ndarray

    @property
    def percentages(self) -> np.ndarray:
        totals = self.counts.sum(axis=0, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            pct = np.where(totals > 0, 100.0 * self.counts / np.maximum(totals, 1), 0.0)
        return pct

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.counts.sum())

    def as_table(self) -> str:
        names = [f"Class-{c}" for c in self.classes]
        width = max(12, *(len(n) + 2 for n in names))
        lines = ["Classified/Actual".ljust(20) + "".join(n.rjust(width) for n in names)]
        for i, name in enumerate(names):
            cells = "".join(f"{self.percentages[i, j]:.1f}% ({self.counts[i, j]})".rjust(width)
                            for j in range(len(names)))
            lines.append(name.ljust(20) + cells)
        lines.append(f"overall accuracy: {100.0 * self.accuracy:.1f}%")
        return "\n".join(lines)

    def as_rows(self) -> list:
        """``(predicted, actual, count, percent)`` tuples in row-major order."""
        return [(p, a, int(self.counts[i, j]), float(self.percentages[i, j]))
                for i, p in enumerate(self.classes) for j, a in enumerate(self.classes)]


def confusion(classes: Sequence[int], predicted: Sequence[int], actual: Sequence[int]) -> ConfusionMatrix:
    classes = tuple(int(c) for c in classes)
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=int)
    for p, a in zip(predicted, actual):
        if p not in index or a not in index:
            raise DomainError(f"label outside class set {classes}: predicted {p}, actual {a}")
        counts[index[p], index[a]] += 1
    return ConfusionMatrix(classes, counts)


def evaluate(model: NnModel, test: Sequence) -> ConfusionMatrix:
    """Confusion matrix of the model on labelled test features."""
    if len(test) == 0:
        raise DomainError("test set is empty")
    classes = tuple(int(c) for c in model.classes)
    actual = [int(f.label) for f in test]
    for a in actual:
        if a not in classes:
            raise DomainError(f"test label {a} not among model classes {classes}")
    return confusion(classes, predict_many(model, test), actual)
