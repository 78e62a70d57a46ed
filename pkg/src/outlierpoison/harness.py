"""Sweeps over (dataset x family x poisoning level) and the sensitivity analyses."""

from __future__ import annotations

import dataclasses
import hashlib
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .attack import apply_plan, build_plan
from .boundary import boundary_disagreement, compute_distances, svm_margin_score
from .dataset import Dataset, SplitPair, split
from .metrics import MetricsReport, confusion, degradation, metrics_bundle
from .models import FAMILIES, default_config, train

ANALYSES = (
    "k_sweep",
    "class_probabilities",
    "feature_importance",
    "margin_score",
    "variance_table",
    "disagreement",
)

DEFAULT_LEVELS = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from the given parts; independent of execution order."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class ExperimentSpec:
    datasets: tuple[Dataset, ...]
    families: tuple[str, ...] = FAMILIES
    levels: tuple[float, ...] = DEFAULT_LEVELS
    rule: str = "cyclic-next"
    ratio: float = 0.75
    seed: int = 42
    analyses: tuple[str, ...] = ()
    k_values: tuple[int, ...] = (3, 5, 10, 15)

    def __post_init__(self):
        if not self.datasets:
            raise ValueError("spec needs at least one dataset")
        for fam in self.families:
            if fam not in FAMILIES:
                raise ValueError(f"unknown family {fam!r}")
        levels = tuple(float(v) for v in self.levels)
        if list(levels) != sorted(levels):
            raise ValueError("levels must be sorted ascending")
        if 0.0 not in levels:
            raise ValueError("levels must include 0 (the clean baseline)")
        object.__setattr__(self, "levels", levels)
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("split ratio must lie in (0, 1)")
        for name in self.analyses:
            if name not in ANALYSES:
                raise ValueError(f"unknown analysis {name!r} (choose from {ANALYSES})")


@dataclass(frozen=True)
class CellResult:
    dataset: str
    family: str
    level: float
    seed: int
    metrics: MetricsReport | None
    lambda_: float
    asr: float
    fpr_increase: float
    disagreement: float
    victims: tuple[int, ...]
    wall_ms: float
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class ExperimentResult:
    cells: tuple[CellResult, ...]
    analyses: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def cell(self, dataset: str, family: str, level: float) -> CellResult:
        for c in self.cells:
            if c.dataset == dataset and c.family == family and c.level == float(level):
                return c
        raise KeyError(f"no cell ({dataset}, {family}, {level})")


def _dataset_digest(ds: Dataset) -> str:
    h = hashlib.sha256()
    h.update(ds.name.encode())
    h.update(np.int64(ds.n_classes).tobytes())
    h.update(ds.features.tobytes())
    h.update(ds.labels.tobytes())
    return h.hexdigest()


def _spec_digest(spec: ExperimentSpec) -> str:
    h = hashlib.sha256()
    payload = dataclasses.asdict(spec)
    payload["datasets"] = [_dataset_digest(ds) for ds in spec.datasets]
    h.update(repr(sorted(payload.items())).encode())
    return h.hexdigest()


def _split_for(spec: ExperimentSpec, ds: Dataset) -> SplitPair:
    return split(ds, spec.ratio, derive_seed(spec.seed, ds.name, "split"))


def _evaluate(model, pair: SplitPair) -> tuple[MetricsReport, np.ndarray]:
    predictions = model.predict(pair.test.features)
    cm = confusion(pair.test.labels, predictions, pair.test.n_classes)
    return metrics_bundle(cm, predictions), predictions


def _run_group(spec: ExperimentSpec, ds: Dataset, pair: SplitPair, family: str) -> list[CellResult]:
    """All levels for one (dataset, family), sharing one surrogate and one ranking."""
    model_seed = derive_seed(spec.seed, ds.name, family, "model")
    cells: list[CellResult] = []

    def failed_cell(level: float, seed: int, wall_ms: float, err: Exception) -> CellResult:
        return CellResult(
            ds.name, family, level, seed, None,
            float("nan"), float("nan"), float("nan"), float("nan"),
            (), wall_ms, error=f"{type(err).__name__}: {err}",
        )

    start = time.perf_counter()
    try:
        config = default_config(family, seed=model_seed)
        surrogate = train(config, pair.train)
        report = compute_distances(surrogate, pair.train)
        clean_metrics, clean_predictions = _evaluate(surrogate, pair)
    except Exception as err:  # noqa: BLE001 - cell failures are data, not aborts
        wall = (time.perf_counter() - start) * 1000.0
        return [
            failed_cell(level, derive_seed(spec.seed, ds.name, family, level), wall, err)
            for level in spec.levels
        ]
    setup_ms = (time.perf_counter() - start) * 1000.0

    for level in spec.levels:
        cell_seed = derive_seed(spec.seed, ds.name, family, level)
        start = time.perf_counter()
        try:
            if level == 0.0:
                # the level-0 victim retrains on identical data; determinism
                # makes it the surrogate, so the clean baseline is reused
                victim = surrogate
                plan = build_plan(report, 0.0, spec.rule, pair.train, seed=cell_seed,
                                  surrogate=surrogate)
                metrics, predictions = clean_metrics, clean_predictions
            else:
                plan = build_plan(report, level, spec.rule, pair.train, seed=cell_seed,
                                  surrogate=surrogate)
                poisoned = apply_plan(pair.train, plan)
                victim = train(config, poisoned.to_dataset())
                metrics, predictions = _evaluate(victim, pair)
            drop = degradation(clean_metrics, metrics)
            disagree = float(np.mean(predictions != clean_predictions))
            wall = (time.perf_counter() - start) * 1000.0
            if level == 0.0:
                wall += setup_ms
            cells.append(
                CellResult(
                    ds.name, family, level, cell_seed, metrics,
                    drop.lambda_, drop.asr, drop.fpr_increase, disagree,
                    tuple(int(i) for i in plan.victim_indices), wall,
                )
            )
        except Exception as err:  # noqa: BLE001
            wall = (time.perf_counter() - start) * 1000.0
            cells.append(failed_cell(level, cell_seed, wall, err))
    return cells


def run_sweep(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Execute every (dataset, family, level) cell plus any requested analyses.

    Cell seeds derive from (master seed, dataset, family, level), so serial and
    parallel execution produce identical results.
    """
    splits = {ds.name: _split_for(spec, ds) for ds in spec.datasets}
    groups = [(ds, fam) for ds in spec.datasets for fam in spec.families]

    def task(group):
        ds, fam = group
        return _run_group(spec, ds, splits[ds.name], fam)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_group = list(pool.map(task, groups))
    else:
        per_group = [task(g) for g in groups]
    cells = tuple(cell for group_cells in per_group for cell in group_cells)

    analyses: dict = {}
    for ds in spec.datasets:
        if "k_sweep" in spec.analyses:
            analyses.setdefault("k_sweep", []).extend(
                k_sweep(ds, spec.k_values, spec.levels, rule=spec.rule,
                        ratio=spec.ratio, seed=spec.seed)
            )
        if "class_probabilities" in spec.analyses:
            analyses.setdefault("class_probabilities", []).extend(
                class_probability_drift(ds, spec.levels, rule=spec.rule,
                                        ratio=spec.ratio, seed=spec.seed)
            )
        if "feature_importance" in spec.analyses:
            for family in ("dt", "svm", "rf"):
                if family in spec.families:
                    analyses.setdefault("feature_importance", []).extend(
                        importance_drift(ds, family, spec.levels, rule=spec.rule,
                                         ratio=spec.ratio, seed=spec.seed)
                    )
        if "margin_score" in spec.analyses and "svm" in spec.families:
            analyses.setdefault("margin_score", []).extend(
                margin_score_table(ds, spec.levels, rule=spec.rule,
                                   ratio=spec.ratio, seed=spec.seed)
            )
    if "variance_table" in spec.analyses:
        analyses["variance_table"] = [
            {"dataset": c.dataset, "family": c.family, "level": c.level,
             "variance": c.metrics.variance if c.metrics else float("nan")}
            for c in cells
        ]
    if "disagreement" in spec.analyses:
        analyses["disagreement"] = [
            {"dataset": c.dataset, "family": c.family, "level": c.level,
             "disagreement": c.disagreement}
            for c in cells
        ]

    provenance = {
        "spec_hash": _spec_digest(spec),
        "master_seed": spec.seed,
        "version": __version__,
        "cell_seeds": {f"{c.dataset}/{c.family}/{c.level:g}": c.seed for c in cells},
        "victims": {f"{c.dataset}/{c.family}/{c.level:g}": list(c.victims) for c in cells},
    }
    return ExperimentResult(cells, analyses, provenance)


def _pipeline_cells(ds: Dataset, family: str, levels, rule: str, ratio: float,
                    seed: int, **config_overrides):
    """Shared scaffolding for the analysis tables: victim model per level."""
    pair = split(ds, ratio, derive_seed(seed, ds.name, "split"))
    model_seed = derive_seed(seed, ds.name, family, "model", *sorted(config_overrides.items()))
    config = default_config(family, seed=model_seed, **config_overrides)
    surrogate = train(config, pair.train)
    report = compute_distances(surrogate, pair.train)
    for level in levels:
        level = float(level)
        if level == 0.0:
            victim = surrogate
        else:
            plan = build_plan(report, level, rule, pair.train,
                              seed=derive_seed(seed, ds.name, family, level), surrogate=surrogate)
            victim = train(config, apply_plan(pair.train, plan).to_dataset())
        yield level, victim, pair


def k_sweep(ds: Dataset, k_values, levels, rule: str = "cyclic-next",
            ratio: float = 0.75, seed: int = 42) -> list[dict]:
    """KNN test accuracy per (neighbor count, poisoning level)."""
    rows = []
    for k in k_values:
        k = int(k)
        for level, victim, pair in _pipeline_cells(ds, "knn", levels, rule, ratio, seed,
                                                   n_neighbors=k):
            accuracy = float(np.mean(victim.predict(pair.test.features) == pair.test.labels))
            rows.append({"dataset": ds.name, "k": k, "level": level, "accuracy": accuracy})
    return rows


def class_probability_drift(ds: Dataset, levels, rule: str = "cyclic-next",
                            ratio: float = 0.75, seed: int = 42) -> list[dict]:
    """Fitted GNB class priors per poisoning level, with rank-flip flags."""
    rows = []
    clean_top: int | None = None
    for level, victim, _pair in _pipeline_cells(ds, "gnb", levels, rule, ratio, seed):
        priors = victim.class_priors()
        top = int(np.argmax(priors))
        if level == 0.0:
            clean_top = top
        for cls, prior in enumerate(priors):
            rows.append({
                "dataset": ds.name, "level": level, "class": cls,
                "prior": float(prior), "top_class": top,
                "rank_changed": top != clean_top,
            })
    return rows


def importance_drift(ds: Dataset, family: str, levels, rule: str = "cyclic-next",
                     ratio: float = 0.75, seed: int = 42) -> list[dict]:
    """Track the clean model's top-3 features across poisoning levels."""
    if family not in ("dt", "svm", "rf"):
        raise ValueError(f"importance drift covers dt/svm/rf, got {family!r}")
    rows = []
    tracked: list[int] = []
    clean_order: list[int] = []
    for level, victim, _pair in _pipeline_cells(ds, family, levels, rule, ratio, seed):
        scores = victim.feature_importance()
        if level == 0.0:
            tracked = list(np.argsort(-scores, kind="stable")[: min(3, len(scores))])
            clean_order = list(tracked)
        level_order = sorted(tracked, key=lambda f: (-scores[f], f))
        inverted = level_order != clean_order
        for rank, feat in enumerate(tracked, start=1):
            rows.append({
                "dataset": ds.name, "family": family, "level": level,
                "feature": int(feat), "feature_name": victim.feature_names[feat],
                "clean_rank": rank, "score": float(scores[feat]),
                "rank_inverted": inverted,
            })
    return rows


def margin_score_table(ds: Dataset, levels, rule: str = "cyclic-next",
                       ratio: float = 0.75, seed: int = 42) -> list[dict]:
    """Minimum one-vs-rest SVM margin per poisoning level."""
    return [
        {"dataset": ds.name, "level": level, "margin": svm_margin_score(victim)}
        for level, victim, _pair in _pipeline_cells(ds, "svm", levels, rule, ratio, seed)
    ]


def variance_table(ds: Dataset, families, levels, rule: str = "cyclic-next",
                   ratio: float = 0.75, seed: int = 42) -> list[dict]:
    """Population variance of predicted class indices on the clean test set, per cell."""
    rows = []
    for family in families:
        for level, victim, pair in _pipeline_cells(ds, family, levels, rule, ratio, seed):
            predictions = victim.predict(pair.test.features)
            rows.append({
                "dataset": ds.name, "family": family, "level": level,
                "variance": float(np.var(predictions)),
            })
    return rows


def boundary_shift(ds: Dataset, family: str, level: float, rule: str = "cyclic-next",
                   ratio: float = 0.75, seed: int = 42) -> float:
    """Clean-vs-poisoned prediction disagreement on the clean test partition."""
    pair = split(ds, ratio, derive_seed(seed, ds.name, "split"))
    model_seed = derive_seed(seed, ds.name, family, "model")
    config = default_config(family, seed=model_seed)
    surrogate = train(config, pair.train)
    report = compute_distances(surrogate, pair.train)
    plan = build_plan(report, level, rule, pair.train,
                      seed=derive_seed(seed, ds.name, family, level), surrogate=surrogate)
    victim = train(config, apply_plan(pair.train, plan).to_dataset())
    return boundary_disagreement(surrogate, victim, pair.test)
