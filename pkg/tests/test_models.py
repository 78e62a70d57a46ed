import numpy as np
import pytest

import outlierpoison as op
from conftest import train_test_accuracy


def fit(family, ds, seed=0, **overrides):
    return op.train(op.default_config(family, seed=seed, **overrides), ds)


@pytest.fixture(scope="module")
def separable_pair():
    ds = op.synth_generate([[0.0, 0.0], [30.0, 30.0]], 1.0, [60, 60], seed=2, name="far2")
    return op.split(ds, 0.75, 4)


class TestTraining:
    def test_knn_iris_anchor(self, iris_split):
        acc = train_test_accuracy("knn", iris_split, seed=1)
        assert acc == pytest.approx(0.975, abs=0.05)

    @pytest.mark.parametrize("family", op.FAMILIES)
    def test_separable_blobs_perfect(self, family, separable_pair):
        # margin dwarfs spread; the 1-NN oracle in test_dataset confirms separability
        assert train_test_accuracy(family, separable_pair, seed=3) == 1.0

    def test_gnb_symmetric_tie_breaks_low(self):
        ds = op.make_dataset("t", [[1.0], [2.0], [1.0], [2.0]], [0, 0, 1, 1])
        model = fit("gnb", ds)
        assert np.all(model.predict([[1.5], [0.0], [9.0]]) == 0)

    def test_missing_class_rejected(self):
        ds = op.make_dataset("t", [[0.0], [1.0], [2.0], [3.0]], [0, 0, 2, 2],
                             n_classes=3, require_all_classes=False)
        with pytest.raises(ValueError, match="class missing"):
            fit("knn", ds)

    @pytest.mark.parametrize("family", op.FAMILIES)
    def test_deterministic_refit(self, family, iris_split):
        probe = np.random.default_rng(9).uniform(0, 8, size=(60, 4))
        a = fit(family, iris_split.train, seed=5)
        b = fit(family, iris_split.train, seed=5)
        assert np.array_equal(a.predict(probe), b.predict(probe))

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown classifier family"):
            op.default_config("svc")


class TestPredict:
    def test_dt_memorizes_training_set(self, iris_split):
        model = fit("dt", iris_split.train)
        assert np.array_equal(model.predict(iris_split.train.features), iris_split.train.labels)

    def test_knn_k1_returns_own_label(self, iris_split):
        model = fit("knn", iris_split.train, n_neighbors=1)
        assert np.array_equal(model.predict(iris_split.train.features), iris_split.train.labels)

    def test_gnb_priors_match_frequencies(self, iris_split):
        model = fit("gnb", iris_split.train)
        counts = iris_split.train.class_counts()
        assert np.allclose(model.class_priors(), counts / counts.sum())

    def test_dimension_mismatch(self, iris_split):
        model = fit("gnb", iris_split.train)
        with pytest.raises(ValueError, match="feature columns"):
            model.predict([[1.0, 2.0]])


class TestPredictProba:
    @pytest.mark.parametrize("family", op.FAMILIES)
    def test_rows_sum_to_one_and_argmax_matches(self, family, iris_split):
        model = fit(family, iris_split.train, seed=2)
        probe = np.vstack([iris_split.test.features,
                           np.random.default_rng(3).uniform(0, 8, size=(50, 4))])
        proba = model.predict_proba(probe)
        assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-9)
        assert np.array_equal(np.argmax(proba, axis=1), model.predict(probe))

    def test_gnb_far_field_confidence(self):
        ds = op.synth_generate([[0.0], [20.0]], 1.0, [50, 50], seed=1)
        model = fit("gnb", ds)
        proba = model.predict_proba([[30.0]])  # 10 sigma past one mean, 30 past the other
        assert proba[0, 1] > 0.99

    def test_knn_vote_fraction(self):
        ds = op.make_dataset("t", [[0.0], [0.1], [0.2], [5.0], [5.1]], [0, 0, 0, 1, 1])
        model = fit("knn", ds, n_neighbors=5)
        assert model.predict_proba([[0.0]])[0].tolist() == [0.6, 0.4]

    def test_mlp_untrained_is_uniform(self):
        ds = op.make_dataset("t", [[0.0], [1.0], [2.0], [3.0]], [0, 0, 1, 1])
        model = fit("mlp", ds, max_epochs=0)
        assert np.allclose(model.predict_proba([[0.5], [9.0]]), 0.5)


class TestFeatureImportance:
    def test_dt_iris_top_feature(self, iris_split):
        scores = fit("dt", iris_split.train).feature_importance()
        assert scores.sum() == pytest.approx(1.0)
        assert scores.max() == pytest.approx(0.90, abs=0.10)
        assert np.argmax(scores) in (2, 3)  # a petal measurement leads

    @pytest.mark.parametrize("family", op.FAMILIES)
    def test_constant_feature_scores_zero(self, family, iris_split):
        train = iris_split.train
        widened = op.make_dataset(
            "t", np.column_stack([train.features, np.full(len(train), 3.0)]),
            train.labels, n_classes=train.n_classes, require_all_classes=False)
        scores = fit(family, widened, seed=1).feature_importance()
        assert scores[-1] == 0.0

    def test_rf_duplicated_feature_shares_importance(self, iris_split):
        train = iris_split.train
        dup = op.make_dataset(
            "t", np.column_stack([train.features, train.features[:, 2]]),
            train.labels, n_classes=train.n_classes, require_all_classes=False)
        scores = fit("rf", dup, seed=8).feature_importance()
        assert abs(scores[2] - scores[4]) <= 0.1


class TestDecisionScores:
    def test_symmetric_midpoint_scores_equal(self):
        ds = op.make_dataset("t", [[-2.0], [-1.0], [1.0], [2.0]], [0, 0, 1, 1])
        model = fit("svm", ds, degree=1, gamma=1.0)
        scores = model.decision_scores([[0.0]])
        assert scores[0, 0] == pytest.approx(scores[0, 1], abs=1e-9)

    @pytest.mark.parametrize("family", ["svm", "mlp"])
    def test_argmax_matches_predict_on_random_probes(self, family, iris_split):
        model = fit(family, iris_split.train, seed=4)
        probe = np.random.default_rng(11).uniform(0, 8, size=(100, 4))
        scores = model.decision_scores(probe)
        assert np.array_equal(np.argmax(scores, axis=1), model.predict(probe))

    @pytest.mark.parametrize("family", ["dt", "rf", "knn", "gnb"])
    def test_unsupported_families_raise(self, family, iris_split):
        with pytest.raises(ValueError, match="decision scores"):
            fit(family, iris_split.train).decision_scores(iris_split.test.features)


class TestFamilyContracts:
    def test_rf_single_tree_equals_dt(self, iris_split):
        dt = fit("dt", iris_split.train)
        rf = fit("rf", iris_split.train, n_trees=1, bootstrap=False, max_features=None)
        probe = np.random.default_rng(5).uniform(0, 8, size=(200, 4))
        assert np.array_equal(dt.predict(probe), rf.predict(probe))

    def test_gnb_boundary_at_prior_weighted_midpoint(self):
        # equal sample variances by symmetric construction, priors 1/3 vs 2/3
        x = np.array([[-1.5], [-0.5], [0.5], [1.5], [0.5], [1.5]])
        y = np.array([0, 0, 1, 1, 1, 1])
        ds = op.make_dataset("t", x, y)
        model = fit("gnb", ds)
        mu0, mu1 = model.means_[0, 0], model.means_[1, 0]
        var = model.variances_[0, 0]
        assert var == pytest.approx(model.variances_[1, 0])
        p0, p1 = model.class_priors()
        expected = 0.5 * (mu0 + mu1) + var * np.log(p0 / p1) / (mu1 - mu0)
        lo, hi = mu0, mu1
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if model.predict([[mid]])[0] == 0:
                lo = mid
            else:
                hi = mid
        assert 0.5 * (lo + hi) == pytest.approx(expected, abs=1e-6)

    def test_mlp_loss_non_increasing(self, blobs3):
        model = fit("mlp", blobs3, seed=6)
        losses = np.asarray(model.loss_history_)
        assert len(losses) >= 2
        assert np.all(np.diff(losses) <= model.config.tol)

    def test_mlp_learns_blobs(self, blobs3):
        model = fit("mlp", blobs3, seed=6)
        assert np.mean(model.predict(blobs3.features) == blobs3.labels) >= 0.99


class TestSerialization:
    @pytest.mark.parametrize("family", op.FAMILIES)
    def test_round_trip_preserves_predictions(self, family, iris_split, tmp_path):
        model = fit(family, iris_split.train, seed=3)
        path = tmp_path / f"{family}.npz"
        op.save_model(model, path)
        clone = op.load_model(path)
        probe = np.random.default_rng(17).uniform(0, 8, size=(80, 4))
        assert np.array_equal(model.predict(probe), clone.predict(probe))
        assert np.array_equal(model.predict_proba(probe), clone.predict_proba(probe))

    def test_version_tag_checked(self, iris_split, tmp_path):
        model = fit("gnb", iris_split.train)
        path = tmp_path / "m.npz"
        op.save_model(model, path)
        import json

        data = dict(np.load(path))
        meta = json.loads(bytes(data["__meta__"]).decode())
        meta["version"] = "other-v9"
        data["__meta__"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
        np.savez(tmp_path / "bad.npz", **data)
        with pytest.raises(ValueError, match="version"):
            op.load_model(tmp_path / "bad.npz")
