"""Uniform-weight k-nearest-neighbour regression (Euclidean metric)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._common import ModelError, as_matrix, as_target


@dataclass(frozen=True)
class KNNConfig:
    k: int = 5

    kind = "knn"

    def __post_init__(self):
        if self.k < 1:
            raise ModelError(f"k must be a positive integer, got {self.k}")


@dataclass(frozen=True)
class KNNModel:
    X: np.ndarray
    y: np.ndarray
    k: int

    kind = "knn"

    def neighbours(self, X_query) -> np.ndarray:
        """Indices of the k nearest training rows for each query row.

        Equal distances resolve to the lower training index.
        """
        Q = as_matrix(X_query, self.X.shape[1])
        # explicit differences rather than the |a|^2 - 2ab + |b|^2 expansion so
        # exact ties stay exact
        d2 = ((Q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
        return np.argsort(d2, axis=1, kind="stable")[:, : self.k]

    def predict(self, X_query) -> np.ndarray:
        return self.y[self.neighbours(X_query)].mean(axis=1)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "k": self.k, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> KNNModel:
        return cls(np.asarray(d["X"], dtype=float), np.asarray(d["y"], dtype=float), int(d["k"]))


def fit_knn(X, y, config: KNNConfig = KNNConfig()) -> KNNModel:
    X = as_matrix(X)
    y = as_target(y, X.shape[0])
    if config.k > X.shape[0]:
        raise ModelError(f"k={config.k} exceeds the {X.shape[0]} training rows")
    return KNNModel(X.copy(), y.copy(), config.k)
