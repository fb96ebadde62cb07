"""Crisp and fuzzy k-nearest-neighbour reference classifiers.

Both use Euclidean distance. Neighbours are ordered by distance, then by
training index. Fuzzy KNN uses crisp neighbour memberships and inverse
distance weights ``1 / d ** (2 / (m - 1))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MIN_DISTANCE = 1e-12


@dataclass(frozen=True)
class Neighbor:
    index: int
    distance: float
    label: str


def _check(train_x: np.ndarray, train_y: Sequence, query: np.ndarray, k: int):
    if train_x.ndim != 2 or len(train_y) != train_x.shape[0]:
        raise ValueError("training matrix and labels disagree in length")
    if query.shape != (train_x.shape[1],):
        raise ValueError(f"query has shape {query.shape}, expected ({train_x.shape[1]},)")
    if not 1 <= k <= train_x.shape[0]:
        raise ValueError(f"K must lie in [1, {train_x.shape[0]}], got {k}")


def nearest_neighbors(train_x, train_y, query, k: int) -> list[Neighbor]:
    train_x = np.asarray(train_x, dtype=float)
    query = np.asarray(query, dtype=float)
    _check(train_x, train_y, query, k)
    dist = np.sqrt(((train_x - query) ** 2).sum(axis=1))
    order = np.argsort(dist, kind="stable")[:k]
    return [Neighbor(int(i), float(dist[i]), train_y[i]) for i in order]


def _class_order(train_y: Sequence, classes: Sequence[str] | None) -> list[str]:
    return list(classes) if classes is not None else list(dict.fromkeys(train_y))


def knn_predict(train_x, train_y, query, k: int, classes: Sequence[str] | None = None) -> str:
    """Majority label among the ``k`` nearest training samples.

    Vote ties go to the class with the smaller summed neighbour distance,
    then to the earlier class in ``classes`` (default: first-appearance order).
    """
    neigh = nearest_neighbors(train_x, train_y, query, k)
    order = _class_order(train_y, classes)
    votes = {c: 0 for c in order}
    spread = {c: 0.0 for c in order}
    for nb in neigh:
        votes[nb.label] += 1
        spread[nb.label] += nb.distance
    rank = {c: i for i, c in enumerate(order)}
    return min(order, key=lambda c: (-votes[c], spread[c], rank[c]))


def fknn_memberships(
    train_x, train_y, query, k: int, m: float = 2.0, classes: Sequence[str] | None = None
) -> dict[str, float]:
    if m <= 1:
        raise ValueError(f"fuzzifier m must exceed 1, got {m}")
    neigh = nearest_neighbors(train_x, train_y, query, k)
    order = _class_order(train_y, classes)
    d = np.maximum([nb.distance for nb in neigh], MIN_DISTANCE)
    w = 1.0 / d ** (2.0 / (m - 1.0))
    total = w.sum()
    u = {c: 0.0 for c in order}
    for nb, wj in zip(neigh, w):
        u[nb.label] += wj
    return {c: float(u[c] / total) for c in order}


def fknn_predict(train_x, train_y, query, k: int, m: float = 2.0, classes=None) -> str:
    u = fknn_memberships(train_x, train_y, query, k, m, classes)
    best = max(u.values())
    return next(c for c, v in u.items() if v == best)


class KNNClassifier:
    """Small fit/predict wrapper used by the benchmark."""

    def __init__(self, k: int = 5, fuzzy: bool = False, m: float = 2.0):
        self.k = k
        self.fuzzy = fuzzy
        self.m = m

    def fit(self, x, y, classes=None):
        self.x_ = np.asarray(x, dtype=float)
        self.y_ = list(y)
        self.classes_ = _class_order(self.y_, classes)
        return self

    def predict(self, x) -> list[str]:
        if self.fuzzy:
            return [fknn_predict(self.x_, self.y_, q, self.k, self.m, self.classes_) for q in np.asarray(x)]
        return [knn_predict(self.x_, self.y_, q, self.k, self.classes_) for q in np.asarray(x)]


def minmax_scale(values: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Scale columns to [0, 1] with training bounds; constant columns map to 0.5."""
    width = upper - lower
    safe = np.where(width > 0, width, 1.0)
    out = np.clip((values - lower) / safe, 0.0, 1.0)
    out[:, width == 0] = 0.5
    return out
