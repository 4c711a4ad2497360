"""The heterogeneous base classifiers and the logistic meta-learner.

All classifiers share the estimator protocol: ``fit(X, y)`` on a float
matrix and binary labels, ``predict_proba(X)`` returning the positive
class probability per row, and ``predict(X)`` thresholding it at 0.5
(so an exact tie predicts positive). Features are expected to be
standardized by the caller; the classifiers themselves do not scale.
"""

import numpy as np

from ._cart import grow_forest, grow_tree, tree_predict_proba
from .base import BaseEstimator, check_labels, check_matrix


class ClassifierMixin:
    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(np.int64)


class KNNClassifier(BaseEstimator, ClassifierMixin):
    """k-nearest-neighbor vote; p = positive fraction among the k nearest.

    Distance ties are broken toward the lower training index.
    """

    def __init__(self, k=1):
        self.k = k

    def fit(self, X, y):
        X = check_matrix(X)
        self.X_ = X.copy()
        self.y_ = check_labels(y, X.shape[0])
        self._sq = (self.X_ * self.X_).sum(axis=1)
        return self

    def predict_proba(self, X, chunk=512):
        X = check_matrix(X, self.X_.shape[1])
        k_eff = min(self.k, self.X_.shape[0])
        out = np.empty(X.shape[0], dtype=np.float64)
        for lo in range(0, X.shape[0], chunk):
            Q = X[lo:lo + chunk]
            d2 = (Q * Q).sum(axis=1)[:, None] - 2.0 * (Q @ self.X_.T) + self._sq[None, :]
            order = np.argsort(d2, axis=1, kind="stable")[:, :k_eff]
            out[lo:lo + chunk] = self.y_[order].mean(axis=1)
        return out


class DecisionTreeClassifier(BaseEstimator, ClassifierMixin):
    """CART with Gini impurity and exact best-split search over all features."""

    def __init__(self, max_depth=20, min_leaf=2):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def fit(self, X, y):
        X = check_matrix(X)
        y = check_labels(y, X.shape[0])
        self.n_features_ = X.shape[1]
        self.tree_ = grow_tree(np.ascontiguousarray(X.T), y, self.max_depth,
                               self.min_leaf, X.shape[1], np.uint64(0))
        return self

    def predict_proba(self, X):
        X = check_matrix(X, self.n_features_)
        return tree_predict_proba(self.tree_, X)


class RandomForestClassifier(BaseEstimator, ClassifierMixin):
    """Bagged CARTs with sqrt(d) random feature candidates per split."""

    def __init__(self, n_trees=100, max_depth=20, min_leaf=2, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed

    def fit(self, X, y):
        X = np.ascontiguousarray(check_matrix(X))
        y = check_labels(y, X.shape[0])
        self.n_features_ = X.shape[1]
        n = X.shape[0]
        max_features = max(1, int(np.sqrt(X.shape[1])))
        rng = np.random.default_rng(np.random.SeedSequence([self.seed]))
        boots = rng.integers(0, n, size=(self.n_trees, n))
        seeds = rng.integers(0, 2 ** 63, size=self.n_trees).astype(np.uint64)
        features, thresholds, lefts, rights, values, n_nodes = grow_forest(
            X, y, boots, seeds, self.max_depth, self.min_leaf, max_features)
        self.trees_ = [(features[t, :n_nodes[t]].copy(), thresholds[t, :n_nodes[t]].copy(),
                        lefts[t, :n_nodes[t]].copy(), rights[t, :n_nodes[t]].copy(),
                        values[t, :n_nodes[t]].copy())
                       for t in range(self.n_trees)]
        return self

    def predict_proba(self, X):
        X = check_matrix(X, self.n_features_)
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees_:
            acc += tree_predict_proba(tree, X)
        return acc / len(self.trees_)


class GaussianNaiveBayes(BaseEstimator, ClassifierMixin):
    """Per-class per-feature Gaussians with a variance floor."""

    def __init__(self, var_floor=1e-9):
        self.var_floor = var_floor

    def fit(self, X, y):
        X = check_matrix(X)
        y = check_labels(y, X.shape[0])
        self.classes_present_ = [int((y == c).sum()) > 0 for c in (0, 1)]
        self.mean_ = np.zeros((2, X.shape[1]))
        self.var_ = np.ones((2, X.shape[1]))
        self.log_prior_ = np.full(2, -np.inf)
        n = X.shape[0]
        for c in (0, 1):
            rows = X[y == c]
            if rows.shape[0] == 0:
                continue
            self.mean_[c] = rows.mean(axis=0)
            self.var_[c] = np.maximum(rows.var(axis=0), self.var_floor)
            self.log_prior_[c] = np.log(rows.shape[0] / n)
        return self

    def predict_proba(self, X):
        X = check_matrix(X, self.mean_.shape[1])
        log_post = np.empty((X.shape[0], 2))
        for c in (0, 1):
            if not self.classes_present_[c]:
                log_post[:, c] = -np.inf
                continue
            z = (X - self.mean_[c]) ** 2 / self.var_[c]
            log_post[:, c] = (self.log_prior_[c]
                              - 0.5 * (np.log(2.0 * np.pi * self.var_[c]).sum() + z.sum(axis=1)))
        shift = log_post.max(axis=1, keepdims=True)
        expd = np.exp(log_post - shift)
        return expd[:, 1] / expd.sum(axis=1)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class LogisticRegressionGD(BaseEstimator, ClassifierMixin):
    """Logistic regression by full-batch gradient descent from zero init.

    L2 penalty applies to the weights, not the bias.
    """

    def __init__(self, learning_rate=0.1, epochs=500, l2=1e-4):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2

    @staticmethod
    def loss(X, y, w, b, l2=0.0):
        z = X @ w + b
        ce = np.logaddexp(0.0, -z) + (1.0 - y) * z
        return float(ce.mean() + 0.5 * l2 * (w @ w))

    @staticmethod
    def gradient(X, y, w, b, l2=0.0):
        r = _sigmoid(X @ w + b) - y
        gw = X.T @ r / X.shape[0] + l2 * w
        gb = float(r.mean())
        return gw, gb

    def fit(self, X, y):
        X = check_matrix(X)
        y = check_labels(y, X.shape[0]).astype(np.float64)
        w = np.zeros(X.shape[1])
        b = 0.0
        for _ in range(self.epochs):
            gw, gb = self.gradient(X, y, w, b, self.l2)
            w -= self.learning_rate * gw
            b -= self.learning_rate * gb
        self.weights_ = w
        self.bias_ = b
        return self

    def predict_proba(self, X):
        X = check_matrix(X, self.weights_.shape[0])
        return _sigmoid(X @ self.weights_ + self.bias_)
