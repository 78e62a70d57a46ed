"""Gaussian naive Bayes with additive variance smoothing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Classifier, check_matrix


@dataclass(frozen=True)
class GNBConfig:
    var_smoothing: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.var_smoothing <= 0:
            raise ValueError("var_smoothing must be positive")


def gaussian_fit(x: np.ndarray, y: np.ndarray, class_ids: np.ndarray, var_smoothing: float):
    """Per-class means, smoothed variances, and empirical priors for the given classes."""
    means = np.vstack([x[y == c].mean(axis=0) for c in class_ids])
    variances = np.vstack([x[y == c].var(axis=0) for c in class_ids])
    epsilon = var_smoothing * float(x.var(axis=0).max())
    if epsilon <= 0.0:
        epsilon = var_smoothing
    variances = variances + epsilon
    priors = np.array([np.mean(y == c) for c in class_ids])
    return means, variances, priors


def joint_log_likelihood(x: np.ndarray, means, variances, priors) -> np.ndarray:
    """log prior + sum of per-feature Gaussian log densities, one column per class."""
    out = np.empty((x.shape[0], means.shape[0]))
    for k in range(means.shape[0]):
        quad = ((x - means[k]) ** 2 / variances[k]).sum(axis=1)
        norm = np.log(2.0 * np.pi * variances[k]).sum()
        out[:, k] = np.log(priors[k]) - 0.5 * (norm + quad)
    return out


def log_posterior(joint: np.ndarray) -> np.ndarray:
    shifted = joint - joint.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


class GNBClassifier(Classifier):
    family = "gnb"

    def __init__(self, config: GNBConfig, x, y, n_classes, feature_names):
        super().__init__(config, n_classes, feature_names)
        class_ids = np.arange(n_classes)
        self.means_, self.variances_, self.priors_ = gaussian_fit(x, y, class_ids, config.var_smoothing)
        self._remember_training_data(x, y)

    def class_priors(self) -> np.ndarray:
        return self.priors_.copy()

    def _joint(self, x) -> np.ndarray:
        x = check_matrix(x, self.n_features)
        return joint_log_likelihood(x, self.means_, self.variances_, self.priors_)

    def predict(self, x) -> np.ndarray:
        return np.argmax(self._joint(x), axis=1)

    def predict_proba(self, x) -> np.ndarray:
        return np.exp(log_posterior(self._joint(x)))
