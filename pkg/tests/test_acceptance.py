"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Quantitative criteria run at desk scale on the bundled 150-row iris file and a
5000-row 10-class IDX stand-in, with the evaluation seed fixed in conftest.
"""

import csv
import hashlib
import time

import numpy as np
import pytest

import outlierpoison as op
from outlierpoison.boundary import DistanceReport
from outlierpoison.harness import class_probability_drift, derive_seed, k_sweep
from conftest import DATA, MASTER
from test_boundary import brute_force_knn_distances, walk_tree_depths

LEVELS = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)


def report(criterion: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {criterion}: {status}" + (f"  [{detail}]" if detail else ""))


@pytest.fixture(scope="session")
def iris_full_sweep(iris):
    spec = op.ExperimentSpec(datasets=(iris,), families=op.FAMILIES, levels=LEVELS, seed=MASTER)
    start = time.perf_counter()
    result = op.run_sweep(spec)
    return result, time.perf_counter() - start


@pytest.fixture(scope="session")
def standin_sweep(standin5k):
    spec = op.ExperimentSpec(datasets=(standin5k,), families=op.FAMILIES, levels=LEVELS,
                             seed=MASTER)
    start = time.perf_counter()
    result = op.run_sweep(spec)
    return result, time.perf_counter() - start


def test_criterion_01_clean_baselines(iris_full_sweep, iris_split):
    result, _ = iris_full_sweep
    knn = result.cell("iris", "knn", 0.0).metrics.accuracy
    gnb = result.cell("iris", "gnb", 0.0).metrics.accuracy
    dt_scores = op.train(
        op.default_config("dt", seed=derive_seed(MASTER, "iris", "dt", "model")),
        iris_split.train,
    ).feature_importance()
    ok = (abs(knn - 0.975) <= 0.05 and abs(gnb - 0.93) <= 0.06
          and abs(dt_scores.max() - 0.90) <= 0.10)
    report("01 clean-baselines", ok,
           f"knn={knn:.4f} gnb={gnb:.4f} dt-top-importance={dt_scores.max():.3f}")
    assert abs(knn - 0.975) <= 0.05
    assert abs(gnb - 0.93) <= 0.06
    assert abs(dt_scores.max() - 0.90) <= 0.10  # the maximum is rank 1 by construction


def test_criterion_02_degradation_at_fifteen(iris_full_sweep):
    result, _ = iris_full_sweep
    clean = {f: result.cell("iris", f, 0.0).metrics.accuracy for f in op.FAMILIES}
    poisoned = {f: result.cell("iris", f, 15.0).metrics.accuracy for f in op.FAMILIES}
    drop = {f: (clean[f] - poisoned[f]) * 100 for f in op.FAMILIES}
    clauses = {
        "direction-all-families": all(poisoned[f] <= clean[f] for f in op.FAMILIES),
        "knn-drop>=10": drop["knn"] >= 10.0,
        "gnb-drop>=15": drop["gnb"] >= 15.0,
        "dt-drop<=knn-drop": drop["dt"] <= drop["knn"],
        "rf-drop<=knn-drop": drop["rf"] <= drop["knn"],
    }
    detail = " ".join(f"{f}:{drop[f]:+.2f}" for f in op.FAMILIES)
    for name, ok in clauses.items():
        report(f"02 {name}", ok, detail if name == "direction-all-families" else "")
    failed = [name for name, ok in clauses.items() if not ok]
    assert not failed, (
        f"clauses failed: {failed}; drops(points)={ {f: round(d, 2) for f, d in drop.items()} } "
        "(the gnb magnitude is unattainable under the clean-test protocol; "
        "see the repo notes on evaluation-protocol limits)"
    )


def test_criterion_03_inverse_k_effect(iris):
    rows = k_sweep(iris, (3, 15), (0.0, 15.0), seed=MASTER)
    acc = {(r["k"], r["level"]): r["accuracy"] for r in rows}
    ok = acc[(15, 15.0)] >= acc[(3, 15.0)]
    report("03 inverse-k", ok, f"k3={acc[(3, 15.0)]:.4f} k15={acc[(15, 15.0)]:.4f}")
    assert ok


def test_criterion_04_gnb_prior_drift(iris):
    rows = class_probability_drift(iris, (0.0, 15.0), seed=MASTER)
    tops = {r["level"]: r["top_class"] for r in rows}
    ok = tops[15.0] != tops[0.0]
    report("04 gnb-prior-drift", ok, f"clean-top={tops[0.0]} poisoned-top={tops[15.0]}")
    assert ok


def test_criterion_05_variance_scale(standin_sweep):
    result, _ = standin_sweep
    values = {}
    for family in op.FAMILIES:
        cell = result.cell(result.cells[0].dataset, family, 0.0)
        if cell.metrics.accuracy >= 0.5:  # non-degenerate
            values[family] = cell.metrics.variance
    ok = values and all(7.0 <= v <= 9.0 for v in values.values())
    report("05 variance-scale", ok,
           " ".join(f"{f}:{v:.2f}" for f, v in values.items()))
    assert values
    for family, value in values.items():
        assert 7.0 <= value <= 9.0, family


def test_criterion_06_poison_bookkeeping(iris_split):
    train = iris_split.train
    feature_hash = hashlib.sha256(train.features.tobytes()).hexdigest()
    ok = True
    for level in LEVELS:
        outcome = op.poison_pipeline(train, "knn", level, seed=MASTER)
        flips = int(np.sum(outcome.poisoned.labels != train.labels))
        expected = int(np.floor(level / 100 * len(train)))
        ok &= flips == expected
        assert flips == expected, level
        poisoned_hash = hashlib.sha256(
            outcome.poisoned.to_dataset().features.tobytes()).hexdigest()
        ok &= poisoned_hash == feature_hash
        assert poisoned_hash == feature_hash
    report("06 poison-bookkeeping", ok, "flip counts exact, features hash-identical")


def test_criterion_07_runtime_bounds(standin_sweep, iris_full_sweep):
    standin_result, standin_wall = standin_sweep
    iris_result, iris_wall = iris_full_sweep
    walls = [c.wall_ms for c in standin_result.cells]
    ok = standin_wall < 600.0 and iris_wall < 60.0 and all(w > 0 for w in walls)
    report("07 runtime", ok,
           f"standin-sweep={standin_wall:.1f}s iris-sweep={iris_wall:.1f}s "
           f"cells-timed={len(walls)}")
    assert not any(c.failed for c in standin_result.cells)
    assert standin_wall < 600.0
    assert iris_wall < 60.0
    assert all(w > 0 for w in walls)


def test_criterion_08_knn_distance_oracle():
    rng = np.random.default_rng(801)
    checked = 0
    for _ in range(25):
        n = int(rng.integers(10, 201))
        d = int(rng.integers(1, 6))
        # integer grids keep both computations exact, so equality is bitwise
        x = rng.integers(0, 21, size=(n, d)).astype(np.float64)
        y = rng.integers(0, 3, size=n)
        y[:3] = (0, 1, 2)
        ds = op.make_dataset(f"r{checked}", x, y, n_classes=3)
        k = int(rng.integers(1, 6))
        model = op.train(op.default_config("knn", n_neighbors=k), ds)
        got = op.compute_distances(model, ds).distances
        want = brute_force_knn_distances(x, k)
        assert np.array_equal(got, want)
        checked += 1
    report("08 knn-oracle", True, f"{checked} random datasets, exact match")


def test_criterion_09_tree_depth_oracle(iris_split):
    rng = np.random.default_rng(901)
    for trial in range(5):
        n = int(rng.integers(30, 120))
        x = rng.normal(size=(n, 3))
        y = rng.integers(0, 3, size=n)
        y[:3] = (0, 1, 2)
        ds = op.make_dataset(f"t{trial}", x, y, n_classes=3)
        dt = op.train(op.default_config("dt"), ds)
        got = op.compute_distances(dt, ds).distances
        want = walk_tree_depths(dt.tree_, x).astype(float)
        assert np.array_equal(got, want)
        rf = op.train(op.default_config("rf", n_trees=1, bootstrap=False, max_features=None), ds)
        assert np.array_equal(op.compute_distances(rf, ds).distances, got)
        assert np.array_equal(rf.predict(x), dt.predict(x))
    dt = op.train(op.default_config("dt"), iris_split.train)
    assert np.array_equal(
        op.compute_distances(dt, iris_split.train).distances,
        walk_tree_depths(dt.tree_, iris_split.train.features).astype(float),
    )
    report("09 tree-depth-oracle", True, "traversal oracle exact; rf(1,no-bootstrap) == dt")


def test_criterion_10_top_outliers_sort_oracle():
    rng = np.random.default_rng(1001)
    for trial in range(20):
        n = int(rng.integers(1, 60))
        values = rng.integers(0, 6, size=n).astype(float)  # dense ties
        oracle = sorted(range(n), key=lambda i: (-values[i], i))
        rep = DistanceReport("t", "knn", values)
        for k in range(n + 1):
            assert op.top_outliers(rep, k).tolist() == oracle[:k]
    report("10 top-outliers-oracle", True, "all k on 20 tied random vectors")


def test_criterion_11_sweep_determinism(tmp_path_factory):
    from outlierpoison.cli import cmd_run

    base = tmp_path_factory.mktemp("determinism")
    config = base / "run.toml"
    config.write_text(f"""
[experiment]
seed = {MASTER}
levels = [0, 15]
families = ["svm", "dt", "rf", "knn", "gnb", "mlp"]

[output]
directory = "serial"

[[datasets]]
type = "csv"
name = "iris"
path = "{DATA / 'iris.csv'}"
label_column = "species"
""", encoding="utf-8")
    assert cmd_run(config, workers=1) == 0
    serial = (base / "serial" / "cells.csv").read_bytes()
    config.write_text(config.read_text().replace('"serial"', '"parallel"'), encoding="utf-8")
    assert cmd_run(config, workers=4) == 0
    parallel = (base / "parallel" / "cells.csv").read_bytes()
    ok = serial == parallel
    report("11 sweep-determinism", ok, f"cells.csv {len(serial)} bytes, serial == parallel")
    assert ok


def test_criterion_12_metric_identities(iris_split):
    probe = np.vstack([iris_split.test.features,
                       np.random.default_rng(12).uniform(0, 8, (60, 4))])
    for family in op.FAMILIES:
        model = op.train(op.default_config(family, seed=3), iris_split.train)
        assert np.array_equal(np.argmax(model.predict_proba(probe), axis=1),
                              model.predict(probe))

    fixtures = [
        # (true, predicted, accuracy, macro precision, macro recall, macro fpr)
        ([0, 0, 1, 1], [0, 1, 1, 0], 1 / 2, 1 / 2, 1 / 2, 1 / 2),
        ([0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2],
         [0, 0, 1, 2, 1, 1, 1, 0, 2, 2, 0, 1],
         7 / 12,
         (2 / 4 + 3 / 5 + 2 / 3) / 3,
         (2 / 4 + 3 / 4 + 2 / 4) / 3,
         (2 / 8 + 2 / 8 + 1 / 8) / 3),
        ([0, 1, 2, 0, 1, 2], [0, 1, 2, 0, 1, 2], 1.0, 1.0, 1.0, 0.0),
    ]
    for true, pred, acc, macro_p, macro_r, macro_fpr in fixtures:
        bundle = op.metrics_bundle(op.confusion(true, pred, max(true) + 1), pred)
        assert bundle.accuracy == pytest.approx(acc)
        assert bundle.macro_precision == pytest.approx(macro_p)
        assert bundle.macro_recall == pytest.approx(macro_r)
        assert bundle.macro_fpr == pytest.approx(macro_fpr)

    constant = op.metrics_bundle(op.confusion([0, 1, 2], [1, 1, 1], 3), [1, 1, 1])
    assert constant.variance == 0.0
    report("12 metric-identities", True,
           "proba-argmax == predict for all families; hand-tallied macros match")


def test_criterion_13_victim_prefix_monotonicity(iris_full_sweep, standin_sweep):
    for result in (iris_full_sweep[0], standin_sweep[0]):
        for family in op.FAMILIES:
            previous: set[int] = set()
            for level in LEVELS:
                cell = result.cell(result.cells[0].dataset, family, level)
                current = set(cell.victims)
                assert previous <= current, (family, level)
                previous = current
    report("13 victim-prefix", True, "nested victim sets on both sweeps")
