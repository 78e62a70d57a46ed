import pathlib

import numpy as np
import pytest

import outlierpoison as op
from outlierpoison.harness import derive_seed

DATA = pathlib.Path(__file__).resolve().parents[1] / "data"

# fixed desk-scale evaluation seed; see notes on seed sensitivity in the repo docs
MASTER = 35


@pytest.fixture(scope="session")
def iris() -> op.Dataset:
    return op.load_csv(DATA / "iris.csv", "species")


@pytest.fixture(scope="session")
def iris_split(iris) -> op.SplitPair:
    return op.split(iris, 0.75, derive_seed(MASTER, iris.name, "split"))


@pytest.fixture(scope="session")
def blobs3() -> op.Dataset:
    # three tight, widely separated clusters: every classifier should ace this
    means = [[0.0, 0.0], [12.0, 12.0], [0.0, 14.0]]
    return op.synth_generate(means, 0.5, [40, 40, 40], seed=11, name="blobs3")


@pytest.fixture(scope="session")
def standin_files(tmp_path_factory):
    from _standin import make_idx_pair

    directory = tmp_path_factory.mktemp("standin")
    return make_idx_pair(directory)


@pytest.fixture(scope="session")
def standin5k(standin_files) -> op.Dataset:
    images, labels = standin_files
    return op.load_idx(images, labels, subsample=5000, seed=7)


def train_test_accuracy(family: str, pair: op.SplitPair, seed: int = 0, **overrides) -> float:
    model = op.train(op.default_config(family, seed=seed, **overrides), pair.train)
    return float(np.mean(model.predict(pair.test.features) == pair.test.labels))
