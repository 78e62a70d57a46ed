"""Loading, splitting and characterizing datasets.

Walks through the CSV loader on the bundled iris file, the synthetic blob
generator, stratified splitting, rank correlation, and the 2-D projection.
"""

from pathlib import Path

import numpy as np

import outlierpoison as op

DATA = Path(__file__).resolve().parents[1] / "data"

# -- load a CSV with a named label column ------------------------------------
iris = op.load_csv(DATA / "iris.csv", label_column="species")
print(f"{iris.name}: {len(iris)} rows, {iris.n_features} features, {iris.n_classes} classes")
print("  class labels were remapped:", iris.metadata["label_mapping"])

# -- stratified split: 75% train, clean 25% test -----------------------------
pair = op.split(iris, ratio=0.75, seed=42)
print(f"split -> train {len(pair.train)} / test {len(pair.test)}")
print("  per-class train counts:", pair.train.class_counts())

# -- synthetic imbalanced, noisy blobs ----------------------------------------
skewed = op.synth_generate(
    means=[[0, 0], [6, 6], [0, 7], [7, 0]],
    scales=1.0,
    counts=[120, 8, 4, 20],
    label_noise=0.1,
    seed=7,
    name="skewed",
)
print(f"\n{skewed.name}: class counts {skewed.class_counts()} (10% labels flipped)")

# -- rank correlation across feature pairs ------------------------------------
summary = op.correlation_summary(iris)
print(f"\nmean pairwise Spearman on iris: {summary.spearman:.4f} (p={summary.p_value:.2e})")
strongest = max(summary.per_pair, key=lambda p: abs(p[2]))
print(f"  strongest pair: {iris.feature_names[strongest[0]]} / "
      f"{iris.feature_names[strongest[1]]} -> {strongest[2]:.3f}")

# -- 2-D projection for plotting ----------------------------------------------
coords, labels = op.pca_project(iris)
for cls in range(iris.n_classes):
    center = coords[labels == cls].mean(axis=0)
    print(f"  class {cls} projected center: ({center[0]:+.2f}, {center[1]:+.2f})")
print("(feed these coordinates to any plotting tool)")
