"""The label-flipping attack end to end, one family at a time.

Builds the plan against a surrogate's distance ranking, applies it, retrains
the victim, and quantifies the damage with the metric bundle.
"""

from pathlib import Path

import numpy as np

import outlierpoison as op

DATA = Path(__file__).resolve().parents[1] / "data"

iris = op.load_csv(DATA / "iris.csv", "species")
pair = op.split(iris, 0.75, seed=42)


def evaluate(model):
    predictions = model.predict(pair.test.features)
    cm = op.confusion(pair.test.labels, predictions, iris.n_classes)
    return op.metrics_bundle(cm, predictions)


# -- step by step at 15% against KNN -------------------------------------------
config = op.default_config("knn", seed=1)
surrogate = op.train(config, pair.train)
report = op.compute_distances(surrogate, pair.train)
plan = op.build_plan(report, level=15.0, rule="cyclic-next", train_set=pair.train)
print(f"plan: {len(plan)} victims out of {len(pair.train)} training rows")
print("  first flips (row, old, new):", plan.reassignments[:4])

poisoned = op.apply_plan(pair.train, plan)
victim = op.train(config, poisoned.to_dataset())
clean, hit = evaluate(surrogate), evaluate(victim)
drop = op.degradation(clean, hit)
print(f"accuracy {clean.accuracy:.4f} -> {hit.accuracy:.4f} "
      f"(lambda = {drop.lambda_:.2f} points, FPR +{drop.fpr_increase:.3f})")

# -- the one-call pipeline across all families ----------------------------------
print(f"\n{'family':>6} {'clean':>7} {'15%':>7} {'drop':>7}")
for family in op.FAMILIES:
    outcome = op.poison_pipeline(pair.train, family, level=15.0, seed=1)
    a = evaluate(outcome.surrogate).accuracy
    b = evaluate(outcome.victim).accuracy
    print(f"{family:>6} {a:7.4f} {b:7.4f} {100 * (a - b):+7.2f}")

# -- alternative relabel rules ---------------------------------------------------
for rule in ("cyclic-next", "least-likely", "fixed-target:0"):
    outcome = op.poison_pipeline(pair.train, "gnb", 15.0, rule=rule, seed=1)
    acc = evaluate(outcome.victim).accuracy
    print(f"gnb @15% with {rule:>15}: accuracy {acc:.4f}")
