"""Classical classifiers used as the stacking front-end.

Each estimator follows the scikit-learn protocol (``fit`` / ``predict`` /
``predict_proba``, ``get_params``) but is implemented from first principles:
no learning code is delegated. All of them emit per-row class-probability
vectors; hard classifiers report empirical frequencies (neighbor vote shares,
leaf frequencies, boosting vote shares).
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .validation import check_feature_matrix, check_labels


def _resolve_n_classes(y, n_classes):
    if n_classes is None:
        return int(y.max()) + 1
    if n_classes < 2:
        raise ValueError(f"n_classes must be >= 2, got {n_classes}")
    return int(n_classes)


class _ProbClassifier(BaseEstimator, ClassifierMixin):
    """Shared fit-input validation and argmax prediction."""

    # True when refitting with a different seed can change predictions.
    stochastic = False

    def _check_fit_inputs(self, X, y, n_classes):
        X = check_feature_matrix(X)
        y = check_labels(y, name="y")
        if y.shape[0] != X.shape[0]:
            raise ValueError(f"got {y.shape[0]} labels for {X.shape[0]} rows")
        k = _resolve_n_classes(y, n_classes)
        y = check_labels(y, n_classes=k, name="y")
        return X, y, k

    def _check_predict_input(self, X):
        X = check_feature_matrix(X)
        if X.shape[1] != self.n_features_:
            raise ValueError(
                f"expected {self.n_features_} features, got {X.shape[1]}"
            )
        return X

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)


class KNNClassifier(_ProbClassifier):
    """k-nearest-neighbor classifier with Euclidean distance.

    Distance ties are broken by lower training-row index; probability rows
    are neighbor vote shares. If k exceeds the training size, all training
    points vote.
    """

    def __init__(self, k=5):
        self.k = k

    def fit(self, X, y, n_classes=None):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        X, y, k_cls = self._check_fit_inputs(X, y, n_classes)
        self.X_ = X
        self.y_ = y
        self.n_classes_ = k_cls
        self.n_features_ = X.shape[1]
        return self

    def predict_proba(self, X):
        X = self._check_predict_input(X)
        k = min(self.k, self.X_.shape[0])
        proba = np.zeros((X.shape[0], self.n_classes_))
        train_sq = (self.X_**2).sum(axis=1)
        # Chunk queries so the distance matrix stays bounded in memory.
        for start in range(0, X.shape[0], 4096):
            Q = X[start:start + 4096]
            d2 = (Q**2).sum(axis=1)[:, None] + train_sq[None, :] - 2.0 * (Q @ self.X_.T)
            # Stable argsort keeps lower training index first on distance ties.
            order = np.argsort(d2, axis=1, kind="stable")[:, :k]
            for i in range(Q.shape[0]):
                votes = np.bincount(self.y_[order[i]], minlength=self.n_classes_)
                proba[start + i] = votes / k
        return proba


class GaussianNBClassifier(_ProbClassifier):
    """Gaussian naive Bayes with a per-class per-feature variance floor.

    The floor keeps one-hot or constant features from producing zero
    variances.
    """

    def __init__(self, var_floor=1e-9):
        self.var_floor = var_floor

    def fit(self, X, y, n_classes=None):
        X, y, k = self._check_fit_inputs(X, y, n_classes)
        self.n_classes_ = k
        self.n_features_ = X.shape[1]
        self.log_prior_ = np.full(k, -np.inf)
        self.mean_ = np.zeros((k, X.shape[1]))
        self.var_ = np.ones((k, X.shape[1]))
        for c in range(k):
            rows = X[y == c]
            if rows.shape[0] == 0:
                continue
            self.log_prior_[c] = math.log(rows.shape[0] / X.shape[0])
            self.mean_[c] = rows.mean(axis=0)
            self.var_[c] = np.maximum(rows.var(axis=0), self.var_floor)
        return self

    def predict_proba(self, X):
        X = self._check_predict_input(X)
        log_joint = np.empty((X.shape[0], self.n_classes_))
        for c in range(self.n_classes_):
            if not np.isfinite(self.log_prior_[c]):
                log_joint[:, c] = -np.inf
                continue
            diff = X - self.mean_[c]
            log_like = -0.5 * (
                np.log(2.0 * np.pi * self.var_[c]) + diff**2 / self.var_[c]
            ).sum(axis=1)
            log_joint[:, c] = self.log_prior_[c] + log_like
        shifted = log_joint - log_joint.max(axis=1, keepdims=True)
        numer = np.exp(shifted)
        return numer / numer.sum(axis=1, keepdims=True)


# --- decision trees -----------------------------------------------------


def _gini(counts):
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts / total
    return 1.0 - float((p * p).sum())


def _best_split(X, y, weights, n_classes, feature_ids):
    """Exhaustive weighted-Gini split search over midpoint thresholds.

    Returns (feature, threshold, gain) or None when no split improves.
    Gain ties resolve to the lowest feature index, then lowest threshold:
    features scan in ascending order with a strict '>' comparison, and
    argmax picks the first (lowest-threshold) maximum within a feature.
    """
    parent_counts = np.zeros(n_classes)
    np.add.at(parent_counts, y, weights)
    parent_gini = _gini(parent_counts)
    total_w = weights.sum()
    m = y.shape[0]

    best = None
    best_gain = 0.0
    for f in feature_ids:
        values = X[:, f]
        order = np.argsort(values, kind="stable")
        sv, sy, sw = values[order], y[order], weights[order]
        cut = sv[:-1] != sv[1:]
        if not cut.any():
            continue
        onehot_w = np.zeros((m, n_classes))
        onehot_w[np.arange(m), sy] = sw
        left_counts = np.cumsum(onehot_w, axis=0)[:-1][cut]
        left_w = np.cumsum(sw)[:-1][cut]
        right_counts = parent_counts - left_counts
        right_w = total_w - left_w
        with np.errstate(invalid="ignore", divide="ignore"):
            gini_l = np.where(
                left_w > 0,
                1.0 - ((left_counts / left_w[:, None]) ** 2).sum(axis=1), 0.0,
            )
            gini_r = np.where(
                right_w > 0,
                1.0 - ((right_counts / right_w[:, None]) ** 2).sum(axis=1), 0.0,
            )
        gains = parent_gini - (left_w * gini_l + right_w * gini_r) / total_w
        pos = int(np.argmax(gains))
        if gains[pos] > best_gain:
            best_gain = float(gains[pos])
            cut_idx = np.flatnonzero(cut)[pos]
            threshold = 0.5 * (sv[cut_idx] + sv[cut_idx + 1])
            best = (f, threshold, best_gain)
    return best


class _TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "proba")

    def __init__(self, proba=None):
        self.feature = None
        self.threshold = None
        self.left = None
        self.right = None
        self.proba = proba


def _leaf_proba(y, weights, n_classes):
    counts = np.zeros(n_classes)
    np.add.at(counts, y, weights)
    total = counts.sum()
    if total <= 0:
        return np.full(n_classes, 1.0 / n_classes)
    return counts / total


def _grow_tree(X, y, weights, n_classes, depth, max_depth, min_leaf, max_features, rng):
    node = _TreeNode()
    if (
        (max_depth is not None and depth >= max_depth)
        or X.shape[0] < 2 * min_leaf
        or np.unique(y).size == 1
    ):
        node.proba = _leaf_proba(y, weights, n_classes)
        return node

    d = X.shape[1]
    if max_features is None or max_features >= d:
        feature_ids = range(d)
    else:
        feature_ids = np.sort(rng.choice(d, size=max_features, replace=False))

    split = _best_split(X, y, weights, n_classes, feature_ids)
    if split is None:
        node.proba = _leaf_proba(y, weights, n_classes)
        return node
    f, threshold, _ = split
    mask = X[:, f] <= threshold
    if mask.sum() < min_leaf or (~mask).sum() < min_leaf:
        node.proba = _leaf_proba(y, weights, n_classes)
        return node
    node.feature = f
    node.threshold = threshold
    node.left = _grow_tree(
        X[mask], y[mask], weights[mask], n_classes,
        depth + 1, max_depth, min_leaf, max_features, rng,
    )
    node.right = _grow_tree(
        X[~mask], y[~mask], weights[~mask], n_classes,
        depth + 1, max_depth, min_leaf, max_features, rng,
    )
    return node


def _tree_predict_into(node, X, idx, out):
    if node.proba is not None:
        out[idx] = node.proba
        return
    mask = X[idx, node.feature] <= node.threshold
    if mask.any():
        _tree_predict_into(node.left, X, idx[mask], out)
    if not mask.all():
        _tree_predict_into(node.right, X, idx[~mask], out)


def _tree_predict(node, X, n_classes):
    out = np.zeros((X.shape[0], n_classes))
    _tree_predict_into(node, X, np.arange(X.shape[0]), out)
    return out


class DecisionTreeClassifier(_ProbClassifier):
    """CART-style tree: Gini impurity, midpoint thresholds, x <= t goes left.

    Leaves predict training class frequencies. Supports sample weights so the
    boosting wrapper can reuse the same split machinery.
    """

    def __init__(self, max_depth=None, min_leaf=1):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def fit(self, X, y, n_classes=None, sample_weight=None):
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_leaf < 1:
            raise ValueError(f"min_leaf must be >= 1, got {self.min_leaf}")
        X, y, k = self._check_fit_inputs(X, y, n_classes)
        if sample_weight is None:
            weights = np.ones(X.shape[0])
        else:
            weights = np.asarray(sample_weight, dtype=float)
        self.n_classes_ = k
        self.n_features_ = X.shape[1]
        self.root_ = _grow_tree(
            X, y, weights, k, 0, self.max_depth, self.min_leaf,
            max_features=None, rng=None,
        )
        return self

    def predict_proba(self, X):
        X = self._check_predict_input(X)
        return _tree_predict(self.root_, X, self.n_classes_)


class RandomForestClassifier(_ProbClassifier):
    """Bagged Gini trees with per-split feature subsampling.

    Per-tree RNGs derive from the forest seed by a fixed counter scheme, so a
    forest is reproducible regardless of fitting order. Probabilities are the
    mean of per-tree leaf frequencies.
    """

    stochastic = True

    def __init__(self, n_trees=100, max_depth=None, max_features="sqrt",
                 min_leaf=1, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_leaf = min_leaf
        self.seed = seed

    def _resolve_max_features(self, d):
        if self.max_features == "sqrt":
            return int(math.ceil(math.sqrt(d)))
        if self.max_features is None:
            return d
        return int(self.max_features)

    def fit(self, X, y, n_classes=None):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        X, y, k = self._check_fit_inputs(X, y, n_classes)
        self.n_classes_ = k
        self.n_features_ = X.shape[1]
        m = X.shape[0]
        max_feat = self._resolve_max_features(X.shape[1])
        self.trees_ = []
        for t in range(self.n_trees):
            rng = np.random.default_rng([self.seed, t])
            boot = rng.integers(0, m, size=m)
            root = _grow_tree(
                X[boot], y[boot], np.ones(m), k, 0,
                self.max_depth, self.min_leaf, max_feat, rng,
            )
            self.trees_.append(root)
        return self

    def predict_proba(self, X):
        X = self._check_predict_input(X)
        acc = np.zeros((X.shape[0], self.n_classes_))
        for root in self.trees_:
            acc += _tree_predict(root, X, self.n_classes_)
        return acc / len(self.trees_)


class AdaBoostClassifier(_ProbClassifier):
    """Multi-class boosting (SAMME) over depth-1 weighted-Gini stumps.

    Probabilities are stump votes weighted by the SAMME coefficients and
    normalized. ``seed`` is accepted for registry uniformity; the stump search
    itself is deterministic.
    """

    stochastic = True

    def __init__(self, n_rounds=50, seed=0):
        self.n_rounds = n_rounds
        self.seed = seed

    def fit(self, X, y, n_classes=None):
        if self.n_rounds < 1:
            raise ValueError(f"n_rounds must be >= 1, got {self.n_rounds}")
        X, y, k = self._check_fit_inputs(X, y, n_classes)
        self.n_classes_ = k
        self.n_features_ = X.shape[1]
        m = X.shape[0]
        w = np.full(m, 1.0 / m)
        self.stumps_ = []
        self.alphas_ = []
        for _ in range(self.n_rounds):
            stump = DecisionTreeClassifier(max_depth=1).fit(
                X, y, n_classes=k, sample_weight=w
            )
            pred = stump.predict(X)
            miss = pred != y
            err = float(w[miss].sum())
            if err <= 0.0:
                # Perfect stump: it decides alone.
                self.stumps_ = [stump]
                self.alphas_ = [1.0]
                break
            if err >= 1.0 - 1.0 / k:
                break
            alpha = math.log((1.0 - err) / err) + math.log(k - 1.0)
            self.stumps_.append(stump)
            self.alphas_.append(alpha)
            w = w * np.exp(alpha * miss)
            w /= w.sum()
        if not self.stumps_:
            # No stump beat random guessing; fall back to class frequencies.
            self.prior_ = np.bincount(y, minlength=k) / m
        else:
            self.prior_ = None
        return self

    def predict_proba(self, X):
        X = self._check_predict_input(X)
        if self.prior_ is not None:
            return np.tile(self.prior_, (X.shape[0], 1))
        votes = np.zeros((X.shape[0], self.n_classes_))
        for alpha, stump in zip(self.alphas_, self.stumps_):
            votes[np.arange(X.shape[0]), stump.predict(X)] += alpha
        return votes / votes.sum(axis=1, keepdims=True)


CLASSIFIER_REGISTRY = {
    "knn": KNNClassifier,
    "naive_bayes": GaussianNBClassifier,
    "decision_tree": DecisionTreeClassifier,
    "random_forest": RandomForestClassifier,
    "adaboost": AdaBoostClassifier,
}

# Best-performing combination in the reference experiments.
DEFAULT_CLASSIFIERS = ("knn", "random_forest", "naive_bayes")


def make_classifier(name, params=None, run_seed=None):
    """Instantiate a registered classifier, deriving a seed for stochastic kinds.

    Stochastic classifiers that were not given an explicit seed get one derived
    from ``run_seed`` and the classifier name, so repeated runs with distinct
    run seeds refit bootstrap-bearing models differently but reproducibly.
    """
    if name not in CLASSIFIER_REGISTRY:
        raise KeyError(
            f"unknown classifier {name!r}; registry has {sorted(CLASSIFIER_REGISTRY)}"
        )
    params = dict(params or {})
    cls = CLASSIFIER_REGISTRY[name]
    if cls.stochastic and "seed" not in params and run_seed is not None:
        entropy = np.random.SeedSequence(
            [int(run_seed), sum(ord(ch) for ch in name)]
        )
        params["seed"] = int(entropy.generate_state(1)[0])
    return cls(**params)
