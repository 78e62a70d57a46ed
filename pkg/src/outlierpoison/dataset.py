"""Loading, validation, splitting and characterization of multiclass tabular datasets."""

from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import special

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class Dataset:
    """An immutable multiclass dataset: real-valued feature matrix plus dense 0-based labels."""

    name: str
    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    feature_names: tuple[str, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


def make_dataset(
    name: str,
    features,
    labels,
    n_classes: int | None = None,
    feature_names: Sequence[str] | None = None,
    metadata: dict | None = None,
    require_all_classes: bool = True,
) -> Dataset:
    """Validate raw arrays and freeze them into a Dataset.

    Loaders require every class index in [0, n_classes) to be present;
    split partitions relax that (a small test fold may miss a class).
    """
    features = np.ascontiguousarray(features, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if features.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {features.shape}")
    if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
        raise ValueError(
            f"labels length {labels.shape} does not match {features.shape[0]} feature rows"
        )
    if features.shape[0] == 0:
        raise ValueError("dataset has no rows")
    if not np.isfinite(features).all():
        raise ValueError("non-finite feature value (NaN or infinity) after loading")
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 0
    if n_classes < 2:
        raise ValueError("multiclass required: dataset has fewer than 2 classes")
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValueError(f"label out of range [0, {n_classes})")
    if require_all_classes:
        present = np.unique(labels)
        if len(present) != n_classes:
            missing = sorted(set(range(n_classes)) - set(present.tolist()))
            raise ValueError(f"classes {missing} have no instances")
    if feature_names is None:
        feature_names = tuple(f"f{i}" for i in range(features.shape[1]))
    else:
        feature_names = tuple(str(f) for f in feature_names)
        if len(feature_names) != features.shape[1]:
            raise ValueError("feature_names length does not match feature count")
    features.flags.writeable = False
    labels.flags.writeable = False
    return Dataset(name, features, labels, int(n_classes), feature_names, dict(metadata or {}))


@dataclass(frozen=True)
class SplitPair:
    """A train/test partition of a source dataset, disjoint by origin row index."""

    train: Dataset
    test: Dataset
    ratio: float
    seed: int
    train_indices: np.ndarray
    test_indices: np.ndarray


@dataclass(frozen=True)
class CorrelationSummary:
    """Mean Spearman rank correlation over all unordered feature pairs."""

    spearman: float
    p_value: float
    per_pair: tuple[tuple[int, int, float], ...]
    constant_features: tuple[int, ...] = ()


def _scale_min_max(features: np.ndarray) -> np.ndarray:
    lo = features.min(axis=0)
    hi = features.max(axis=0)
    span = hi - lo
    span[span == 0.0] = 1.0
    return (features - lo) / span


def load_csv(path, label_column: str, scaling: str = "none") -> Dataset:
    """Load a header-first CSV with one label column; remaining columns must be numeric.

    Class labels are remapped to a dense 0-based range (mapping kept in metadata);
    min-max scaling, if selected, maps each feature column to [0, 1].
    """
    if scaling not in ("none", "min-max"):
        raise ValueError(f"unknown scaling {scaling!r} (expected 'none' or 'min-max')")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"empty CSV file: {path}") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ValueError(f"label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]
        rows: list[list[float]] = []
        raw_labels: list[str] = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise ValueError(f"line {lineno}: expected {len(header)} cells, got {len(record)}")
            values = []
            for i, cell in enumerate(record):
                if i == label_idx:
                    raw_labels.append(cell.strip())
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise ValueError(
                        f"non-numeric feature cell {cell!r} in column {header[i]!r}, line {lineno}"
                    ) from None
                if not np.isfinite(value):
                    raise ValueError(
                        f"non-finite feature value {cell!r} in column {header[i]!r}, line {lineno}"
                    )
                values.append(value)
            rows.append(values)
    features = np.asarray(rows, dtype=np.float64)
    classes = sorted(set(raw_labels))
    mapping = {c: i for i, c in enumerate(classes)}
    labels = np.asarray([mapping[c] for c in raw_labels], dtype=np.int64)
    if scaling == "min-max":
        features = _scale_min_max(features)
    return make_dataset(
        path.stem,
        features,
        labels,
        n_classes=len(classes),
        feature_names=feature_names,
        metadata={"label_mapping": mapping, "scaling": scaling, "source": str(path)},
    )


def _open_idx(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"IDX file not found: {path}")
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def load_idx(images_path, labels_path, subsample: int | None = None, seed: int = 0) -> Dataset:
    """Load an image/label pair in IDX binary format, pixels scaled to [0, 1].

    With `subsample`, returns a seeded stratified sample of that many rows
    (per-class counts proportional, largest remainder first).
    """
    with _open_idx(images_path) as fh:
        magic, count, rows, cols = struct.unpack(">iiii", fh.read(16))
        if magic != IDX_IMAGES_MAGIC:
            raise ValueError(
                f"magic-number mismatch in {images_path}: got {magic:#010x}, "
                f"want {IDX_IMAGES_MAGIC:#010x}"
            )
        pixels = np.frombuffer(fh.read(count * rows * cols), dtype=np.uint8)
        if pixels.size != count * rows * cols:
            raise ValueError(f"truncated image data in {images_path}")
    with _open_idx(labels_path) as fh:
        magic, label_count = struct.unpack(">ii", fh.read(8))
        if magic != IDX_LABELS_MAGIC:
            raise ValueError(
                f"magic-number mismatch in {labels_path}: got {magic:#010x}, "
                f"want {IDX_LABELS_MAGIC:#010x}"
            )
        raw_labels = np.frombuffer(fh.read(label_count), dtype=np.uint8)
        if raw_labels.size != label_count:
            raise ValueError(f"truncated label data in {labels_path}")
    if count != label_count:
        raise ValueError(f"count mismatch: {count} images vs {label_count} labels")

    features = pixels.reshape(count, rows * cols).astype(np.float64) / 255.0
    classes = np.unique(raw_labels)
    mapping = {int(c): i for i, c in enumerate(classes.tolist())}
    labels = np.searchsorted(classes, raw_labels).astype(np.int64)

    if subsample is not None:
        if subsample <= 0:
            raise ValueError("subsample must be positive")
        if subsample > count:
            raise ValueError(f"subsample {subsample} larger than file ({count} rows)")
        take = stratified_allocation(np.bincount(labels), subsample)
        rng = np.random.default_rng(seed)
        chosen = []
        for cls, n_take in enumerate(take):
            cls_idx = np.flatnonzero(labels == cls)
            chosen.append(rng.choice(cls_idx, size=n_take, replace=False))
        keep = np.sort(np.concatenate(chosen))
        features = features[keep]
        labels = labels[keep]

    return make_dataset(
        Path(images_path).stem,
        features,
        labels,
        n_classes=len(classes),
        feature_names=[f"px{i}" for i in range(features.shape[1])],
        metadata={"label_mapping": mapping, "scaling": "min-max", "subsample_seed": seed},
    )


def stratified_allocation(class_counts: np.ndarray, total: int) -> np.ndarray:
    """Allocate `total` draws across classes proportionally (largest remainder, ties to lowest class)."""
    class_counts = np.asarray(class_counts, dtype=np.int64)
    population = class_counts.sum()
    exact = class_counts * (total / population)
    base = np.floor(exact).astype(np.int64)
    base = np.minimum(base, class_counts)
    shortfall = total - int(base.sum())
    remainders = exact - np.floor(exact)
    # hand the leftover rows to the classes with the largest fractional parts
    order = np.lexsort((np.arange(len(class_counts)), -remainders))
    for cls in order:
        if shortfall == 0:
            break
        if base[cls] < class_counts[cls]:
            base[cls] += 1
            shortfall -= 1
    return base


def synth_generate(
    means: Sequence[Sequence[float]],
    scales: Sequence[float] | float,
    counts: Sequence[int],
    label_noise: float = 0.0,
    seed: int = 0,
    name: str = "synthetic",
) -> Dataset:
    """Generate seeded isotropic Gaussian blobs, one per class, plus uniform label noise.

    `scales` are per-class standard deviations; `label_noise` is the fraction of
    rows whose label is flipped to a uniformly chosen other class.
    """
    means_arr = np.asarray(means, dtype=np.float64)
    if means_arr.ndim != 2 or means_arr.shape[0] < 2:
        raise ValueError("need mean vectors for at least 2 classes")
    n_classes = means_arr.shape[0]
    if np.isscalar(scales):
        scales_arr = np.full(n_classes, float(scales))
    else:
        scales_arr = np.asarray(scales, dtype=np.float64)
    if scales_arr.shape != (n_classes,):
        raise ValueError("scales must be a scalar or one value per class")
    if (scales_arr <= 0).any():
        raise ValueError("degenerate covariance: blob scale must be positive")
    counts_arr = np.asarray(counts, dtype=np.int64)
    if counts_arr.shape != (n_classes,) or (counts_arr <= 0).any():
        raise ValueError("counts must be positive, one per class")
    if not 0.0 <= label_noise < 0.5:
        raise ValueError("label-noise rate must be in [0, 0.5)")

    rng = np.random.default_rng(seed)
    blocks = []
    labels = []
    for cls in range(n_classes):
        blocks.append(means_arr[cls] + scales_arr[cls] * rng.standard_normal((counts_arr[cls], means_arr.shape[1])))
        labels.append(np.full(counts_arr[cls], cls, dtype=np.int64))
    features = np.concatenate(blocks)
    labels = np.concatenate(labels)

    n_flip = int(np.floor(label_noise * len(labels)))
    if n_flip:
        flip_idx = rng.choice(len(labels), size=n_flip, replace=False)
        for i in flip_idx:
            others = [c for c in range(n_classes) if c != labels[i]]
            labels[i] = others[rng.integers(len(others))]

    return make_dataset(
        name,
        features,
        labels,
        n_classes=n_classes,
        metadata={"label_noise": label_noise, "seed": seed},
    )


def split(dataset: Dataset, ratio: float, seed: int, stratified: bool = True) -> SplitPair:
    """Partition a dataset into train/test with |train| = floor(ratio * n).

    Stratified mode keeps per-class proportions within one instance and
    guarantees each class lands in both partitions.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("split ratio must lie in (0, 1)")
    n = len(dataset)
    rng = np.random.default_rng(seed)
    if stratified:
        counts = dataset.class_counts()
        if (counts < 2).any():
            bad = np.flatnonzero(counts < 2).tolist()
            raise ValueError(f"stratified split needs >=2 instances per class, classes {bad} have fewer")
        target = int(np.floor(ratio * n))
        per_class = stratified_allocation(counts, target)
        # every class must survive in train; a tiny test fold may lose one
        per_class = np.maximum(per_class, 1)
        train_parts = []
        test_parts = []
        for cls in range(dataset.n_classes):
            cls_idx = np.flatnonzero(dataset.labels == cls)
            picked = rng.permutation(cls_idx)
            train_parts.append(picked[: per_class[cls]])
            test_parts.append(picked[per_class[cls] :])
        train_idx = np.sort(np.concatenate(train_parts))
        test_idx = np.sort(np.concatenate(test_parts))
    else:
        picked = rng.permutation(n)
        cut = int(np.floor(ratio * n))
        train_idx = np.sort(picked[:cut])
        test_idx = np.sort(picked[cut:])

    def subset(idx: np.ndarray, tag: str) -> Dataset:
        return make_dataset(
            f"{dataset.name}/{tag}",
            dataset.features[idx].copy(),
            dataset.labels[idx].copy(),
            n_classes=dataset.n_classes,
            feature_names=dataset.feature_names,
            metadata={**dataset.metadata, "origin_indices": idx.copy()},
            require_all_classes=False,
        )

    return SplitPair(subset(train_idx, "train"), subset(test_idx, "test"), ratio, seed, train_idx, test_idx)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    inv = np.empty(len(values), dtype=np.int64)
    inv[order] = np.arange(len(values))
    ordered = values[order]
    run_start = np.r_[True, ordered[1:] != ordered[:-1]]
    dense = np.cumsum(run_start)[inv]
    edges = np.r_[np.flatnonzero(run_start), len(values)]
    # average of the 1-based positions covered by each tied run
    return 0.5 * (edges[dense] + edges[dense - 1] + 1)


def correlation_summary(dataset: Dataset) -> CorrelationSummary:
    """Spearman rank correlation for every unordered feature pair, averaged to one scalar.

    The p-value for the aggregate coefficient uses the t approximation at
    N = row count; constant columns contribute coefficient 0 and are flagged.
    """
    x = dataset.features
    n, d = x.shape
    if d < 2:
        raise ValueError("correlation needs at least 2 features")
    if n < 3:
        raise ValueError("correlation needs at least 3 rows")
    ranks = np.column_stack([_average_ranks(x[:, j]) for j in range(d)])
    stds = ranks.std(axis=0)
    constant = tuple(int(j) for j in np.flatnonzero(stds == 0.0))
    centered = ranks - ranks.mean(axis=0)
    pairs = []
    for i in range(d):
        for j in range(i + 1, d):
            if stds[i] == 0.0 or stds[j] == 0.0:
                coeff = 0.0
            else:
                coeff = float(np.dot(centered[:, i], centered[:, j]) / (n * stds[i] * stds[j]))
            pairs.append((i, j, coeff))
    aggregate = float(np.mean([c for _, _, c in pairs]))
    dof = n - 2
    denom = 1.0 - aggregate * aggregate
    if denom <= 0.0:
        p_value = 0.0
    else:
        t_stat = aggregate * np.sqrt(dof / denom)
        p_value = float(2.0 * special.stdtr(dof, -abs(t_stat)))
    return CorrelationSummary(aggregate, p_value, tuple(pairs), constant)


def pca_project(dataset: Dataset, dims: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Project centered features onto the top principal axes (descending eigenvalue order).

    Sign convention: each component's largest-magnitude loading is positive.
    Returns (coordinates, labels) aligned by row.
    """
    x = dataset.features
    if x.shape[1] < dims:
        raise ValueError(f"PCA to {dims} dims needs at least {dims} features")
    centered = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:dims]
    for k in range(dims):
        lead = np.argmax(np.abs(components[k]))
        if components[k, lead] < 0:
            components[k] = -components[k]
    return centered @ components.T, dataset.labels.copy()
