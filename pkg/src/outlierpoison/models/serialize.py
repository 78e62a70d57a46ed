"""Versioned npz snapshots of fitted classifiers; round-trips preserve predictions exactly."""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from .gnb import GNBClassifier, GNBConfig
from .knn import KNNClassifier, KNNConfig
from .mlp import MLPClassifier, MLPConfig
from .svm import SVMClassifier, SVMConfig
from .tree import DTClassifier, DTConfig, RFClassifier, RFConfig, _Tree

FORMAT_VERSION = "outlierpoison-model-v1"

_CONFIGS = {
    "svm": SVMConfig,
    "dt": DTConfig,
    "rf": RFConfig,
    "knn": KNNConfig,
    "gnb": GNBConfig,
    "mlp": MLPConfig,
}
_CLASSES = {
    "svm": SVMClassifier,
    "dt": DTClassifier,
    "rf": RFClassifier,
    "knn": KNNClassifier,
    "gnb": GNBClassifier,
    "mlp": MLPClassifier,
}

_TREE_FIELDS = ("feature", "threshold", "left", "right", "depth", "counts", "raw_importance")


def _tree_arrays(prefix: str, tree: _Tree) -> dict:
    return {f"{prefix}{name}": getattr(tree, name) for name in _TREE_FIELDS}


def _tree_from(prefix: str, data) -> _Tree:
    return _Tree.from_arrays(**{name: data[f"{prefix}{name}"] for name in _TREE_FIELDS})


def save_model(model, path) -> None:
    """Write a fitted classifier to `path` as a self-describing npz record."""
    meta = {
        "version": FORMAT_VERSION,
        "family": model.family,
        "config": dataclasses.asdict(model.config),
        "n_classes": model.n_classes,
        "feature_names": list(model.feature_names),
    }
    arrays: dict = {"train_x": model._train_x, "train_y": model._train_y}
    if model.family == "gnb":
        arrays.update(means=model.means_, variances=model.variances_, priors=model.priors_)
    elif model.family == "svm":
        arrays.update(
            coefs=model.coefs_,
            biases=model.biases_,
            kkt=model.kkt_violations_,
            wnorm2=model.squared_weight_norms_,
            gamma=np.float64(model.gamma_),
        )
    elif model.family == "mlp":
        arrays.update(w1=model.w1, b1=model.b1, w2=model.w2, b2=model.b2)
    elif model.family == "dt":
        arrays.update(_tree_arrays("tree_", model.tree_))
    elif model.family == "rf":
        arrays["n_trees"] = np.int64(len(model.trees_))
        for t, tree in enumerate(model.trees_):
            arrays.update(_tree_arrays(f"tree{t}_", tree))
    # knn needs nothing beyond the training data
    with open(path, "wb") as fh:
        np.savez(fh, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)


def load_model(path):
    """Restore a classifier saved by save_model."""
    data = np.load(path)
    meta = json.loads(bytes(data["__meta__"]).decode())
    if meta.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model record version {meta.get('version')!r}")
    family = meta["family"]
    config = _CONFIGS[family](**meta["config"])
    model = object.__new__(_CLASSES[family])
    model.config = config
    model.n_classes = int(meta["n_classes"])
    model.feature_names = tuple(meta["feature_names"])
    model._train_x = data["train_x"]
    model._train_y = data["train_y"]
    if family == "gnb":
        model.means_ = data["means"]
        model.variances_ = data["variances"]
        model.priors_ = data["priors"]
    elif family == "svm":
        model.coefs_ = data["coefs"]
        model.biases_ = data["biases"]
        model.kkt_violations_ = data["kkt"]
        model.squared_weight_norms_ = data["wnorm2"]
        model.gamma_ = float(data["gamma"])
        model.objective_histories_ = []
    elif family == "mlp":
        model.w1 = data["w1"]
        model.b1 = data["b1"]
        model.w2 = data["w2"]
        model.b2 = data["b2"]
        model.loss_history_ = []
    elif family == "dt":
        model.tree_ = _tree_from("tree_", data)
    elif family == "rf":
        model.trees_ = [_tree_from(f"tree{t}_", data) for t in range(int(data["n_trees"]))]
    return model
