"""Label-flipping attack: poison the training points ranked farthest from the boundary."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .boundary import DistanceReport, compute_distances, top_outliers
from .dataset import Dataset, make_dataset
from .models import Classifier, default_config, train

RELABEL_RULES = ("cyclic-next", "least-likely", "fixed-target")


class StalePlanError(ValueError):
    """The plan's recorded labels do not match the dataset it is applied to."""


@dataclass(frozen=True)
class PoisonPlan:
    """Victim rows and their label reassignments for one poisoning level."""

    level: float
    victim_indices: np.ndarray
    reassignments: tuple[tuple[int, int, int], ...]  # (row, old_label, new_label)
    relabel_rule: str
    seed: int

    def __len__(self) -> int:
        return len(self.victim_indices)


@dataclass(frozen=True)
class PoisonedDataset:
    """A clean training set plus materialized flipped labels; features are untouched."""

    base: Dataset
    plan: PoisonPlan
    labels: np.ndarray

    def to_dataset(self) -> Dataset:
        return make_dataset(
            self.base.name,
            self.base.features,
            self.labels,
            n_classes=self.base.n_classes,
            feature_names=self.base.feature_names,
            metadata={
                **self.base.metadata,
                "poison_level": self.plan.level,
                "poison_rule": self.plan.relabel_rule,
            },
            require_all_classes=False,
        )


def parse_rule(rule: str) -> tuple[str, int | None]:
    """Split a rule string like 'fixed-target:2' into (name, target)."""
    name, _, arg = rule.partition(":")
    if name not in RELABEL_RULES:
        raise ValueError(f"unknown relabel rule {rule!r} (choose from {RELABEL_RULES})")
    if name == "fixed-target":
        if not arg:
            raise ValueError("fixed-target rule needs a class, e.g. 'fixed-target:2'")
        return name, int(arg)
    if arg:
        raise ValueError(f"rule {name!r} takes no argument")
    return name, None


def build_plan(
    report: DistanceReport,
    level: float,
    rule: str,
    train_set: Dataset,
    seed: int = 0,
    surrogate: Classifier | None = None,
) -> PoisonPlan:
    """Select floor(level% of rows) farthest points and pick each one's wrong label.

    cyclic-next maps a class to its successor mod n; least-likely uses the
    surrogate's least probable class (falling back to cyclic when that is the
    current label); fixed-target always aims at one class with the same fallback.
    """
    if not 0.0 <= level < 100.0:
        raise ValueError(f"poison level must be in [0, 100), got {level}")
    if len(report) != len(train_set):
        raise ValueError("distance report is not aligned to the training set")
    name, target = parse_rule(rule)
    n_classes = train_set.n_classes
    if name == "fixed-target" and not 0 <= target < n_classes:
        raise ValueError(f"fixed-target class {target} out of range [0, {n_classes})")
    if name == "least-likely" and surrogate is None:
        raise ValueError("least-likely rule needs the surrogate model")

    count = int(np.floor(level / 100.0 * len(train_set)))
    victims = top_outliers(report, count)
    old_labels = train_set.labels[victims]
    if name == "least-likely" and count:
        least = np.argmin(surrogate.predict_proba(train_set.features[victims]), axis=1)

    reassignments = []
    for pos, (row, old) in enumerate(zip(victims.tolist(), old_labels.tolist())):
        if name == "cyclic-next":
            new = (old + 1) % n_classes
        elif name == "least-likely":
            new = int(least[pos])
            if new == old:
                new = (old + 1) % n_classes
        else:
            new = target if target != old else (old + 1) % n_classes
        reassignments.append((row, old, new))
    return PoisonPlan(float(level), victims, tuple(reassignments), rule, int(seed))


def apply_plan(train_set: Dataset, plan: PoisonPlan) -> PoisonedDataset:
    """Materialize the plan's label flips; pure, the base dataset is unchanged."""
    labels = train_set.labels.copy()
    for row, old, new in plan.reassignments:
        if not 0 <= row < len(train_set):
            raise ValueError(f"plan row {row} out of bounds")
        if labels[row] != old:
            raise StalePlanError(
                f"row {row}: plan expects label {old}, dataset has {labels[row]}"
            )
        labels[row] = new
    return PoisonedDataset(train_set, plan, labels)


class PipelineResult(NamedTuple):
    surrogate: Classifier
    plan: PoisonPlan
    poisoned: PoisonedDataset
    victim: Classifier


def poison_pipeline(
    train_set: Dataset,
    family: str,
    level: float,
    rule: str = "cyclic-next",
    seed: int = 0,
    **config_overrides,
) -> PipelineResult:
    """Surrogate fit, distance ranking, label flipping, victim refit, end to end.

    Surrogate and victim share the family and configuration (the strongest
    grey-box reading); only the training labels differ between them.
    """
    config = default_config(family, seed=seed, **config_overrides)
    surrogate = train(config, train_set)
    report = compute_distances(surrogate, train_set)
    plan = build_plan(report, level, rule, train_set, seed=seed, surrogate=surrogate)
    poisoned = apply_plan(train_set, plan)
    victim = train(config, poisoned.to_dataset())
    return PipelineResult(surrogate, plan, poisoned, victim)
