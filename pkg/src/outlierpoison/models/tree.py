"""Gini decision tree (exact best-split) and a small bootstrap forest built on it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Classifier, check_matrix, normalize_importance

_BLOCK_CELLS = 2_097_152  # rows x features budget per split-scan block


@dataclass(frozen=True)
class DTConfig:
    criterion: str = "gini"
    splitter: str = "best"
    seed: int = 0

    def __post_init__(self):
        if self.criterion != "gini":
            raise ValueError("only gini impurity is supported")
        if self.splitter != "best":
            raise ValueError("only the exhaustive best splitter is supported")


@dataclass(frozen=True)
class RFConfig:
    n_trees: int = 3
    criterion: str = "gini"
    bootstrap: bool = True
    max_features: str | int | None = "sqrt"
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.criterion != "gini":
            raise ValueError("only gini impurity is supported")


def _best_split(xn: np.ndarray, yn: np.ndarray, n_classes: int, feature_ids: np.ndarray):
    """Exact best gini split over the given features.

    Returns (feature, threshold, split_goodness) or None when no feature
    varies within the node. Goodness is sum over children of
    sum_c count_c^2 / count; larger means purer children.
    """
    n = len(yn)
    totals = np.bincount(yn, minlength=n_classes).astype(np.float64)
    best_g = -np.inf
    best_feat = -1
    best_thr = 0.0
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    start = 0
    block = max(1, _BLOCK_CELLS // max(n, 1))
    while start < len(feature_ids):
        feats = feature_ids[start : start + block]
        start += block
        vals = xn[:, feats]
        lo = vals.min(axis=0)
        hi = vals.max(axis=0)
        keep = lo < hi
        if not keep.any():
            continue
        feats = feats[keep]
        vals = vals[:, keep]
        order = np.argsort(vals, axis=0, kind="stable")
        svals = np.take_along_axis(vals, order, axis=0)
        slabs = yn[order]
        sumsq_left = np.zeros((n - 1, len(feats)))
        sumsq_right = np.zeros((n - 1, len(feats)))
        for c in range(n_classes):
            if totals[c] == 0.0:
                continue
            cum = np.cumsum(slabs == c, axis=0)[:-1].astype(np.float64)
            sumsq_left += cum * cum
            rest = totals[c] - cum
            sumsq_right += rest * rest
        goodness = sumsq_left / n_left + sumsq_right / n_right
        goodness[svals[1:] <= svals[:-1]] = -np.inf
        flat = goodness.ravel(order="F")
        at = int(np.argmax(flat))
        g = flat[at]
        if g > best_g:
            col, row = divmod(at, n - 1)
            thr = 0.5 * (svals[row, col] + svals[row + 1, col])
            if thr >= svals[row + 1, col]:  # midpoint rounded up to the right value
                thr = svals[row, col]
            best_g = g
            best_feat = int(feats[col])
            best_thr = float(thr)
    if best_feat < 0:
        return None
    return best_feat, best_thr, best_g


class _Tree:
    """Flat-array binary tree: feature < 0 marks a leaf."""

    def __init__(self, x: np.ndarray, y: np.ndarray, n_classes: int,
                 max_features: int | None, rng: np.random.Generator | None):
        n, d = x.shape
        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        depth: list[int] = []
        counts: list[np.ndarray] = []
        raw_importance = np.zeros(d)
        all_features = np.arange(d)

        def new_node(level: int) -> int:
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            depth.append(level)
            counts.append(np.zeros(n_classes))
            return len(feature) - 1

        stack = [(new_node(0), np.arange(n))]
        while stack:
            node, rows = stack.pop()
            yn = y[rows]
            tally = np.bincount(yn, minlength=n_classes).astype(np.float64)
            counts[node] = tally
            if len(rows) < 2 or (tally > 0).sum() <= 1:
                continue
            xn = x[rows]
            varying = np.flatnonzero(xn.min(axis=0) < xn.max(axis=0))
            if varying.size == 0:
                continue
            if max_features is not None and varying.size > max_features:
                picked = rng.choice(varying, size=max_features, replace=False)
                cand = np.sort(picked)
            else:
                cand = varying
            found = _best_split(xn, yn, n_classes, cand)
            if found is None:
                continue
            feat, thr, goodness = found
            parent_g = float((tally * tally).sum()) / len(rows)
            raw_importance[feat] += (goodness - parent_g) / n
            go_left = xn[:, feat] <= thr
            feature[node] = feat
            threshold[node] = thr
            left_id = new_node(depth[node] + 1)
            right_id = new_node(depth[node] + 1)
            left[node] = left_id
            right[node] = right_id
            stack.append((right_id, rows[~go_left]))
            stack.append((left_id, rows[go_left]))

        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.depth = np.asarray(depth, dtype=np.int64)
        self.counts = np.vstack(counts)
        self.leaf_label = np.argmax(self.counts, axis=1)
        self.raw_importance = raw_importance

    @classmethod
    def from_arrays(cls, **arrays) -> "_Tree":
        tree = cls.__new__(cls)
        for name, value in arrays.items():
            setattr(tree, name, value)
        tree.leaf_label = np.argmax(tree.counts, axis=1)
        return tree

    def route(self, x: np.ndarray) -> np.ndarray:
        """Leaf node id for every row."""
        ptr = np.zeros(len(x), dtype=np.int64)
        while True:
            active = np.flatnonzero(self.feature[ptr] >= 0)
            if active.size == 0:
                return ptr
            at = ptr[active]
            go_left = x[active, self.feature[at]] <= self.threshold[at]
            ptr[active] = np.where(go_left, self.left[at], self.right[at])

    def leaf_depths(self, x: np.ndarray) -> np.ndarray:
        return self.depth[self.route(x)]

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.leaf_label[self.route(x)]

    def leaf_fractions(self, x: np.ndarray) -> np.ndarray:
        tally = self.counts[self.route(x)]
        return tally / tally.sum(axis=1, keepdims=True)


class DTClassifier(Classifier):
    family = "dt"

    def __init__(self, config: DTConfig, x, y, n_classes, feature_names):
        super().__init__(config, n_classes, feature_names)
        self.tree_ = _Tree(x, y, n_classes, max_features=None, rng=None)
        self._remember_training_data(x, y)

    def predict(self, x) -> np.ndarray:
        return self.tree_.predict(check_matrix(x, self.n_features))

    def predict_proba(self, x) -> np.ndarray:
        return self.tree_.leaf_fractions(check_matrix(x, self.n_features))

    def leaf_depths(self, x) -> np.ndarray:
        return self.tree_.leaf_depths(check_matrix(x, self.n_features))

    def feature_importance(self) -> np.ndarray:
        return normalize_importance(self.tree_.raw_importance.copy())


class RFClassifier(Classifier):
    family = "rf"

    def __init__(self, config: RFConfig, x, y, n_classes, feature_names):
        super().__init__(config, n_classes, feature_names)
        d = x.shape[1]
        if config.max_features == "sqrt":
            per_split = max(1, int(np.sqrt(d)))
        elif config.max_features is None:
            per_split = None
        else:
            per_split = min(d, int(config.max_features))
        self.trees_: list[_Tree] = []
        for t in range(config.n_trees):
            rng = np.random.default_rng([int(config.seed) & 0x7FFFFFFF, t])
            rows = rng.integers(0, len(x), size=len(x)) if config.bootstrap else np.arange(len(x))
            self.trees_.append(_Tree(x[rows], y[rows], n_classes, per_split, rng))
        self._remember_training_data(x, y)

    def predict_proba(self, x) -> np.ndarray:
        x = check_matrix(x, self.n_features)
        counts = np.zeros((len(x), self.n_classes))
        for tree in self.trees_:
            counts[np.arange(len(x)), tree.predict(x)] += 1.0
        return counts / len(self.trees_)

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.predict_proba(x), axis=1)

    def leaf_depths(self, x) -> np.ndarray:
        """Mean leaf depth across the forest's trees."""
        x = check_matrix(x, self.n_features)
        return np.mean([tree.leaf_depths(x) for tree in self.trees_], axis=0)

    def feature_importance(self) -> np.ndarray:
        per_tree = [normalize_importance(t.raw_importance.copy()) for t in self.trees_]
        return normalize_importance(np.mean(per_tree, axis=0))
