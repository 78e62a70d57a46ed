"""k-nearest-neighbor classifier with uniform votes and Euclidean distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Classifier, check_matrix


@dataclass(frozen=True)
class KNNConfig:
    n_neighbors: int = 5
    weights: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")
        if self.weights != "uniform":
            raise ValueError("only uniform vote weights are supported")


def pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between the rows of a and the rows of b."""
    sq = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * (a @ b.T)
    return np.clip(sq, 0.0, None)


class KNNClassifier(Classifier):
    family = "knn"

    def __init__(self, config: KNNConfig, x, y, n_classes, feature_names):
        super().__init__(config, n_classes, feature_names)
        if config.n_neighbors > len(x):
            raise ValueError(f"n_neighbors={config.n_neighbors} exceeds training size {len(x)}")
        self._remember_training_data(x, y)

    def _neighbor_labels(self, x) -> np.ndarray:
        x = check_matrix(x, self.n_features)
        sq = pairwise_sq_dists(x, self._train_x)
        # stable argsort breaks distance ties toward the lower training index
        order = np.argsort(sq, axis=1, kind="stable")[:, : self.config.n_neighbors]
        return self._train_y[order]

    def predict_proba(self, x) -> np.ndarray:
        votes = self._neighbor_labels(x)
        counts = np.zeros((votes.shape[0], self.n_classes))
        rows = np.repeat(np.arange(votes.shape[0]), votes.shape[1])
        np.add.at(counts, (rows, votes.ravel()), 1.0)
        return counts / self.config.n_neighbors

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.predict_proba(x), axis=1)
