"""The six classifier families with their fixed surrogate configurations."""

from __future__ import annotations

import dataclasses

import numpy as np

from ..dataset import Dataset
from .base import Classifier, ConvergenceError
from .gnb import GNBClassifier, GNBConfig
from .knn import KNNClassifier, KNNConfig
from .mlp import MLPClassifier, MLPConfig
from .serialize import load_model, save_model
from .svm import SVMClassifier, SVMConfig
from .tree import DTClassifier, DTConfig, RFClassifier, RFConfig

FAMILIES = ("svm", "dt", "rf", "knn", "gnb", "mlp")

_CONFIG_TYPES = {
    "svm": SVMConfig,
    "dt": DTConfig,
    "rf": RFConfig,
    "knn": KNNConfig,
    "gnb": GNBConfig,
    "mlp": MLPConfig,
}
_MODEL_TYPES = {
    SVMConfig: SVMClassifier,
    DTConfig: DTClassifier,
    RFConfig: RFClassifier,
    KNNConfig: KNNClassifier,
    GNBConfig: GNBClassifier,
    MLPConfig: MLPClassifier,
}


def default_config(family: str, seed: int = 0, **overrides):
    """The fixed per-family surrogate configuration, optionally overridden field-wise."""
    try:
        cfg_type = _CONFIG_TYPES[family]
    except KeyError:
        raise ValueError(f"unknown classifier family {family!r} (choose from {FAMILIES})") from None
    return dataclasses.replace(cfg_type(seed=seed), **overrides)


def family_of(config) -> str:
    for name, cfg_type in _CONFIG_TYPES.items():
        if isinstance(config, cfg_type):
            return name
    raise ValueError(f"unrecognized config type {type(config).__name__}")


def train(config, train_set: Dataset) -> Classifier:
    """Fit a classifier of the config's family; deterministic given (config, train_set)."""
    counts = train_set.class_counts()
    if (counts == 0).any():
        missing = np.flatnonzero(counts == 0).tolist()
        raise ValueError(f"class missing from train_set: {missing}")
    model_type = _MODEL_TYPES[type(config)]
    return model_type(
        config,
        train_set.features,
        train_set.labels,
        train_set.n_classes,
        train_set.feature_names,
    )


__all__ = [
    "FAMILIES",
    "Classifier",
    "ConvergenceError",
    "DTConfig",
    "GNBConfig",
    "KNNConfig",
    "MLPConfig",
    "RFConfig",
    "SVMConfig",
    "default_config",
    "family_of",
    "load_model",
    "save_model",
    "train",
]
