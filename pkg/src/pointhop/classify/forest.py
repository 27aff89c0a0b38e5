from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from pointhop.errors import DegenerateLabels, DimensionMismatch
from pointhop.metrics import Metrics
from pointhop.rng import make_rng, splitmix64
from pointhop.workers import ordered_map

logger = logging.getLogger("pointhop")


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 128
    max_depth: int | None = None
    min_leaf: int = 1
    # "sqrt" or an explicit feature count per split
    max_features: str | int = "sqrt"

    def features_per_split(self, n_features: int) -> int:
        if self.max_features == "sqrt":
            return max(1, int(math.sqrt(n_features)))
        return max(1, min(int(self.max_features), n_features))


def validate_forest_params(params: ForestParams) -> None:
    if params.n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    if params.max_depth is not None and params.max_depth < 1:
        raise ValueError("max_depth must be >= 1 or unset")
    if params.min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    if params.max_features != "sqrt":
        if not isinstance(params.max_features, int) or params.max_features < 1:
            raise ValueError("max_features must be 'sqrt' or a positive integer")


@dataclass(frozen=True)
class DecisionTree:
    """Array-encoded binary tree; ``feature == -1`` marks a leaf.

    Samples go left when ``x[feature] <= threshold``. Nodes are numbered in
    creation order, so children always have larger ids than their parent.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes, n_classes) class distribution per node

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            feat = self.feature[node]
            internal = feat >= 0
            if not internal.any():
                return node
            r = rows[internal]
            n = node[internal]
            go_left = X[r, feat[internal]] <= self.threshold[n]
            node[internal] = np.where(go_left, self.left[n], self.right[n])

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


@dataclass(frozen=True)
class RandomForestModel:
    trees: tuple[DecisionTree, ...]
    n_classes: int
    n_features: int
    params: ForestParams
    seed: int


def _best_split(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    rng: np.random.Generator,
    mtry: int,
    min_leaf: int,
) -> tuple[int, float] | None:
    n = X.shape[0]
    positions = np.arange(1, n)
    n_left = positions.astype(np.float64)
    n_right = n - n_left
    allowed = (positions >= min_leaf) & (positions <= n - min_leaf)
    best: tuple[float, int, float] | None = None
    tried = 0
    # Constant features do not count towards mtry; keep drawing until mtry
    # informative ones were scored (or features run out).
    for f in rng.permutation(X.shape[1]):
        if tried >= mtry:
            break
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        if xs[0] == xs[-1]:
            continue
        tried += 1
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), y[order]] = 1.0
        left_counts = np.cumsum(onehot, axis=0)[:-1]
        right_counts = left_counts[-1] + onehot[-1] - left_counts
        gini_left = 1.0 - ((left_counts / n_left[:, None]) ** 2).sum(axis=1)
        gini_right = 1.0 - ((right_counts / n_right[:, None]) ** 2).sum(axis=1)
        score = (n_left * gini_left + n_right * gini_right) / n
        valid = allowed & (xs[:-1] < xs[1:])
        if not valid.any():
            continue
        score = np.where(valid, score, np.inf)
        i = int(np.argmin(score))
        if best is None or score[i] < best[0]:
            lo, hi = xs[i], xs[i + 1]
            threshold = lo + (hi - lo) / 2.0
            if not lo <= threshold < hi:
                threshold = lo
            best = (float(score[i]), int(f), float(threshold))
    if best is None:
        return None
    return best[1], best[2]


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    params: ForestParams,
    rng: np.random.Generator,
) -> DecisionTree:
    mtry = params.features_per_split(X.shape[1])
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[np.ndarray] = []

    def new_node(idx: np.ndarray) -> int:
        counts = np.bincount(y[idx], minlength=n_classes).astype(np.float64)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(counts / counts.sum())
        return len(feature) - 1

    root = new_node(np.arange(X.shape[0]))
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if value[node].max() == 1.0:
            continue
        if params.max_depth is not None and depth >= params.max_depth:
            continue
        if len(idx) < 2 * params.min_leaf:
            continue
        split = _best_split(X[idx], y[idx], n_classes, rng, mtry, params.min_leaf)
        if split is None:
            continue
        f, thr = split
        go_left = X[idx, f] <= thr
        left_id = new_node(idx[go_left])
        right_id = new_node(idx[~go_left])
        feature[node] = f
        threshold[node] = thr
        left[node] = left_id
        right[node] = right_id
        stack.append((right_id, idx[~go_left], depth + 1))
        stack.append((left_id, idx[go_left], depth + 1))

    return DecisionTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.vstack(value),
    )


def check_labels(labels: np.ndarray) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64)
    if y.ndim != 1 or y.size == 0:
        raise DegenerateLabels("labels must be a non-empty 1D array")
    if y.min() < 0:
        raise DegenerateLabels("labels must be non-negative class ids")
    if np.unique(y).size < 2:
        raise DegenerateLabels("need at least two distinct classes")
    return y


def fit_random_forest(
    features: np.ndarray,
    labels: np.ndarray,
    params: ForestParams,
    seed: int,
    *,
    n_classes: int | None = None,
    workers: int = 1,
    metrics: Metrics | None = None,
) -> RandomForestModel:
    """Bagged CART trees with Gini splits over sqrt(D) random features.

    Tree ``t`` draws its bootstrap sample and feature subsets from a Philox
    stream keyed by ``splitmix64(seed, t)``.
    """
    validate_forest_params(params)
    X = np.asarray(features, dtype=np.float64)
    y = check_labels(labels)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch("features must be (n_samples, n_features) matching labels")
    n_classes = n_classes or int(y.max()) + 1

    def grow(t: int) -> DecisionTree:
        rng = make_rng(splitmix64(seed, t))
        sample = rng.integers(0, X.shape[0], size=X.shape[0])
        tree = _grow_tree(X[sample], y[sample], n_classes, params, rng)
        if metrics:
            metrics.inc("trees_fitted_total")
        return tree

    trees = ordered_map(grow, list(range(params.n_trees)), workers)
    logger.info(
        "FOREST FIT trees=%d samples=%d features=%d nodes=%d",
        len(trees),
        X.shape[0],
        X.shape[1],
        sum(t.n_nodes for t in trees),
    )
    return RandomForestModel(
        trees=tuple(trees),
        n_classes=n_classes,
        n_features=X.shape[1],
        params=params,
        seed=seed,
    )


def forest_predict_proba(model: RandomForestModel, X: np.ndarray) -> np.ndarray:
    total = np.zeros((X.shape[0], model.n_classes))
    # Fixed tree order keeps the sum bit-exact.
    for tree in model.trees:
        total += tree.predict_proba(X)
    return total / len(model.trees)
