"""The six classifier families and their fixed surrogate configurations.

Trains each family on the iris training fold, then shows the prediction,
probability, decision-score and feature-importance surfaces.
"""

from pathlib import Path

import numpy as np

import outlierpoison as op

DATA = Path(__file__).resolve().parents[1] / "data"

iris = op.load_csv(DATA / "iris.csv", "species")
pair = op.split(iris, 0.75, seed=42)

print(f"{'family':>6} {'test acc':>9}   top feature (importance)")
models = {}
for family in op.FAMILIES:
    model = op.train(op.default_config(family, seed=1), pair.train)
    models[family] = model
    acc = np.mean(model.predict(pair.test.features) == pair.test.labels)
    scores = model.feature_importance()
    best = int(np.argmax(scores))
    print(f"{family:>6} {acc:9.4f}   {iris.feature_names[best]} ({scores[best]:.3f})")

# -- probabilities agree with predictions under one tie-break ------------------
probe = pair.test.features[:5]
gnb = models["gnb"]
print("\nGNB probabilities on five test rows:")
for row, proba in zip(probe, gnb.predict_proba(probe)):
    print("  ", np.round(proba, 3), "-> class", int(np.argmax(proba)))

# -- margins and decision scores (SVM and MLP only) ----------------------------
svm = models["svm"]
print(f"\nSVM minimum one-vs-rest margin: {op.svm_margin_score(svm):.4f}")
print("SVM decision scores on one row:", np.round(svm.decision_scores(probe[:1]), 3))

# -- models serialize and round-trip exactly -----------------------------------
import tempfile

with tempfile.NamedTemporaryFile(suffix=".npz") as fh:
    op.save_model(svm, fh.name)
    clone = op.load_model(fh.name)
    same = np.array_equal(clone.predict(pair.test.features), svm.predict(pair.test.features))
    print(f"\nround-tripped SVM predicts identically: {same}")
