"""Evaluation bundle: confusion counts, macro one-vs-rest metrics, prediction variance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i, j] = instances of true class i predicted as class j."""

    n_classes: int
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    macro_fpr: float
    variance: float
    correct_classification_rate: float
    per_class_precision: tuple[float, ...]
    per_class_recall: tuple[float, ...]
    per_class_fpr: tuple[float, ...]
    degenerate_classes: tuple[int, ...] = ()


@dataclass(frozen=True)
class Degradation:
    lambda_: float  # accuracy drop in percentage points
    asr: float
    fpr_increase: float


def confusion(true_labels, predicted_labels, n_classes: int) -> ConfusionMatrix:
    """Exact class-by-class tally of (true, predicted) pairs."""
    true_labels = np.asarray(true_labels, dtype=np.int64)
    predicted_labels = np.asarray(predicted_labels, dtype=np.int64)
    if true_labels.shape != predicted_labels.shape:
        raise ValueError(
            f"length mismatch: {true_labels.shape} true vs {predicted_labels.shape} predicted"
        )
    for name, arr in (("true", true_labels), ("predicted", predicted_labels)):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise ValueError(f"{name} label out of range [0, {n_classes})")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (true_labels, predicted_labels), 1)
    return ConfusionMatrix(n_classes, counts)


def metrics_bundle(cm: ConfusionMatrix, predictions) -> MetricsReport:
    """Per-class one-vs-rest precision/recall/FPR with unweighted macro averages.

    A class with a zero denominator contributes 0 and is flagged as degenerate.
    Variance is the population variance of the predicted class-index sequence.
    """
    predictions = np.asarray(predictions, dtype=np.int64)
    if len(predictions) != cm.total:
        raise ValueError("predictions length does not match confusion-matrix total")
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    tp = np.diag(counts)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp
    tn = total - tp - fp - fn

    degenerate: set[int] = set()

    def ratio(num: np.ndarray, denom: np.ndarray) -> np.ndarray:
        out = np.zeros(cm.n_classes)
        for c in range(cm.n_classes):
            if denom[c] > 0:
                out[c] = num[c] / denom[c]
            else:
                degenerate.add(c)
        return out

    precision = ratio(tp, tp + fp)
    recall = ratio(tp, tp + fn)
    fpr = ratio(fp, fp + tn)
    macro_p = float(precision.mean())
    macro_r = float(recall.mean())
    f1 = 0.0 if macro_p + macro_r == 0.0 else 2.0 * macro_p * macro_r / (macro_p + macro_r)
    accuracy = float(tp.sum() / total)
    return MetricsReport(
        accuracy=accuracy,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=float(f1),
        macro_fpr=float(fpr.mean()),
        variance=float(np.var(predictions)) if len(predictions) else 0.0,
        correct_classification_rate=accuracy,
        per_class_precision=tuple(precision.tolist()),
        per_class_recall=tuple(recall.tolist()),
        per_class_fpr=tuple(fpr.tolist()),
        degenerate_classes=tuple(sorted(degenerate)),
    )


def degradation(clean: MetricsReport, poisoned: MetricsReport) -> Degradation:
    """Accuracy-point drop (also read as attack success) and FPR increase."""
    drop = (clean.accuracy - poisoned.accuracy) * 100.0
    return Degradation(
        lambda_=float(drop),
        asr=float(drop),
        fpr_increase=float(poisoned.macro_fpr - clean.macro_fpr),
    )
