"""Per-point distance from the decision boundary, one scalar scheme per classifier family.

The convention is uniform: larger means farther from the boundary, so ranked
extraction of maxima works the same way for every family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .models import Classifier
from .models.gnb import gaussian_fit, joint_log_likelihood, log_posterior
from .models.knn import pairwise_sq_dists


@dataclass(frozen=True)
class DistanceReport:
    """Non-negative boundary distances aligned to training-row indices."""

    dataset: str
    family: str
    distances: np.ndarray

    def __len__(self) -> int:
        return len(self.distances)


def _score_based_distances(model: Classifier, x: np.ndarray) -> np.ndarray:
    scores = model.decision_scores(x)
    predicted = np.argmax(scores, axis=1)
    return np.abs(scores[np.arange(len(x)), predicted])


def _knn_distances(model: Classifier, x: np.ndarray) -> np.ndarray:
    sq = pairwise_sq_dists(x, model._train_x)
    np.fill_diagonal(sq, np.inf)  # a training point is not its own neighbor
    k = min(model.config.n_neighbors, len(x) - 1)
    kth_smallest = np.partition(sq, k - 1, axis=1)[:, k - 1]
    return np.sqrt(kth_smallest)


def _gnb_distances(model: Classifier, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # two-fold scheme: score each half with parameters fitted on the other half
    fold = np.zeros(len(x), dtype=np.int64)
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        fold[members[1::2]] = 1
    raw = np.empty(len(x))
    for this_half in (0, 1):
        other = np.flatnonzero(fold != this_half)
        here = np.flatnonzero(fold == this_half)
        classes = np.unique(y[other])
        means, variances, priors = gaussian_fit(
            x[other], y[other], classes, model.config.var_smoothing
        )
        joint = joint_log_likelihood(x[here], means, variances, priors)
        raw[here] = log_posterior(joint).max(axis=1)
    return raw - raw.min()


def compute_distances(model: Classifier, train_set: Dataset) -> DistanceReport:
    """Boundary distance of every training point under the model's family scheme.

    SVM and MLP use the absolute decision score of the predicted class; DT the
    leaf depth; RF the mean leaf depth over its trees; KNN the distance to the
    k-th nearest neighbor (self excluded); GNB the cross-fold maximum class
    log-probability shifted to be non-negative.
    """
    if model.n_features != train_set.n_features:
        raise ValueError(
            f"model expects {model.n_features} features, dataset has {train_set.n_features}"
        )
    x = train_set.features
    if model.family in ("svm", "mlp"):
        distances = _score_based_distances(model, x)
    elif model.family in ("dt", "rf"):
        distances = model.leaf_depths(x).astype(np.float64)
    elif model.family == "knn":
        distances = _knn_distances(model, x)
    elif model.family == "gnb":
        distances = _gnb_distances(model, x, train_set.labels)
    else:
        raise ValueError(f"no distance scheme for family {model.family!r}")
    if not np.isfinite(distances).all():
        raise ValueError("non-finite boundary distance")
    return DistanceReport(train_set.name, model.family, np.ascontiguousarray(distances))


def top_outliers(report: DistanceReport, count: int) -> np.ndarray:
    """Indices of the `count` largest distances, descending; ties by ascending index."""
    if count < 0 or count > len(report):
        raise ValueError(f"count {count} out of range for {len(report)} distances")
    return np.argsort(-report.distances, kind="stable")[:count]


def svm_margin_score(model: Classifier) -> float:
    """Minimum geometric margin 1/||w|| over the one-vs-rest subproblems."""
    if model.family != "svm":
        raise ValueError(f"margin score needs an SVM, got {model.family!r}")
    return model.margin_score()


def boundary_disagreement(clean: Classifier, poisoned: Classifier, probe: Dataset) -> float:
    """Fraction of probe rows on which the two models predict different classes."""
    if clean.n_features != probe.n_features or poisoned.n_features != probe.n_features:
        raise ValueError("probe feature count does not match the models")
    return float(np.mean(clean.predict(probe.features) != poisoned.predict(probe.features)))
