"""Shared classifier plumbing: input checks, tie-breaks, permutation importance."""

from __future__ import annotations

import numpy as np


class ConvergenceError(RuntimeError):
    """A solver hit its iteration cap before reaching its stopping tolerance."""


def check_matrix(x, n_features: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != n_features:
        raise ValueError(f"expected {n_features} feature columns, got shape {x.shape}")
    return x


class Classifier:
    """Base for all fitted classifiers.

    Tie-break is uniform everywhere: equal votes, probabilities or scores
    resolve to the lowest class index (numpy argmax picks the first maximum).
    """

    family: str = ""

    def __init__(self, config, n_classes: int, feature_names: tuple[str, ...]):
        self.config = config
        self.n_classes = n_classes
        self.feature_names = feature_names
        self._train_x: np.ndarray | None = None
        self._train_y: np.ndarray | None = None

    def _remember_training_data(self, x: np.ndarray, y: np.ndarray) -> None:
        self._train_x = x
        self._train_y = y

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.predict_proba(x), axis=1)

    def predict_proba(self, x) -> np.ndarray:
        raise NotImplementedError

    def decision_scores(self, x) -> np.ndarray:
        raise ValueError(f"family {self.family!r} has no decision scores (SVM and MLP only)")

    def feature_importance(self) -> np.ndarray:
        """Per-feature scores normalized to sum 1 (all-zero if nothing is informative)."""
        return permutation_importance(self)


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def normalize_importance(raw: np.ndarray) -> np.ndarray:
    raw = np.clip(raw, 0.0, None)
    total = raw.sum()
    if total <= 0.0:
        return np.zeros_like(raw)
    return raw / total


def permutation_importance(model: Classifier, n_repeats: int = 5) -> np.ndarray:
    """Mean training-accuracy drop when one feature column is shuffled, per feature.

    Uses the training set remembered at fit time; negatives are clamped to 0
    before normalization.
    """
    x, y = model._train_x, model._train_y
    if x is None or y is None:
        raise ValueError("model has no stored training data")
    rng = np.random.default_rng([int(model.config.seed) & 0x7FFFFFFF, 0xFEA7])
    baseline = float(np.mean(model.predict(x) == y))
    drops = np.zeros(x.shape[1])
    for j in range(x.shape[1]):
        accs = []
        for _ in range(n_repeats):
            shuffled = x.copy()
            shuffled[:, j] = shuffled[rng.permutation(len(x)), j]
            accs.append(float(np.mean(model.predict(shuffled) == y)))
        drops[j] = baseline - float(np.mean(accs))
    return normalize_importance(drops)
