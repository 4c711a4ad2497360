import numpy as np
import pytest

from pestcast._cart import tree_predict_proba
from pestcast.base import StandardScaler
from pestcast.classifiers import (DecisionTreeClassifier, GaussianNaiveBayes,
                                  KNNClassifier, LogisticRegressionGD,
                                  RandomForestClassifier)


class TestScaler:
    def test_zscore_and_constant_passthrough(self):
        X = np.array([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]])
        Z = StandardScaler().fit_transform(X)
        assert Z[:, 0] == pytest.approx([-np.sqrt(1.5), 0.0, np.sqrt(1.5)])
        assert (Z[:, 1] == 0.0).all()

    def test_get_params(self):
        assert KNNClassifier(k=3).get_params() == {"k": 3}
        assert RandomForestClassifier(seed=5).get_params()["seed"] == 5


class TestKNN:
    def test_training_point_returns_own_label(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(30, 4))
        y = rng.integers(0, 2, 30)
        knn = KNNClassifier(k=1).fit(X, y)
        p = knn.predict_proba(X)
        assert np.array_equal(p, y.astype(float))

    def test_tie_at_half_predicts_positive(self):
        X = np.array([[0.0], [2.0]])
        y = np.array([1, 0])
        knn = KNNClassifier(k=2).fit(X, y)
        assert knn.predict_proba([[1.0]])[0] == 0.5
        assert knn.predict([[1.0]])[0] == 1  # >= 0.5 rule

    def test_distance_tie_broken_by_lower_training_index(self):
        X = np.array([[0.0], [0.0], [0.0]])
        y = np.array([0, 1, 1])
        knn = KNNClassifier(k=1).fit(X, y)
        assert knn.predict_proba([[0.0]])[0] == 0.0  # index 0 wins the tie

    def test_k_capped_at_train_size(self):
        X = np.array([[0.0], [1.0]])
        y = np.array([1, 1])
        knn = KNNClassifier(k=5).fit(X, y)
        assert knn.predict_proba([[0.4]])[0] == 1.0

    def test_dimension_mismatch(self):
        knn = KNNClassifier(k=1).fit(np.zeros((3, 2)), np.array([0, 1, 0]))
        with pytest.raises(ValueError, match="dimension"):
            knn.predict_proba(np.zeros((1, 3)))


def best_split_bruteforce(X, y):
    """Exhaustive lowest-Gini split over all features and midpoints."""
    n, d = X.shape
    best = (np.inf, None, None)
    for f in range(d):
        vals = np.unique(X[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            thr = lo + 0.5 * (hi - lo)
            left = X[:, f] <= thr
            nl, nr = left.sum(), n - left.sum()
            if nl < 2 or nr < 2:
                continue
            pl = y[left].mean()
            pr = y[~left].mean()
            g = (nl * 2 * pl * (1 - pl) + nr * 2 * pr * (1 - pr)) / n
            if g < best[0] - 1e-15:
                best = (g, f, thr)
    return best


class TestDecisionTree:
    def test_separable_single_feature_single_split(self):
        rng = np.random.default_rng(2)
        x = np.concatenate([rng.uniform(-2, -0.1, 40), rng.uniform(0.1, 2, 40)])
        X = x.reshape(-1, 1)
        y = (x > 0).astype(int)
        tree = DecisionTreeClassifier().fit(X, y)
        assert len(tree.tree_[0]) == 3  # root plus two leaves
        assert (tree.predict(X) == y).all()

    def test_root_split_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(3)
        for trial in range(10):
            X = rng.normal(size=(60, 5))
            y = rng.integers(0, 2, 60)
            tree = DecisionTreeClassifier(max_depth=1).fit(X, y)
            g, f, thr = best_split_bruteforce(X, y)
            feature, threshold = tree.tree_[0], tree.tree_[1]
            if f is None:
                assert feature[0] == -1
            else:
                assert feature[0] == f
                assert threshold[0] == pytest.approx(thr, abs=1e-12)

    def test_max_depth_respected(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(300, 4))
        y = rng.integers(0, 2, 300)
        tree = DecisionTreeClassifier(max_depth=3).fit(X, y)
        feature, threshold, left, right, value = tree.tree_

        def depth(node):
            if feature[node] < 0:
                return 0
            return 1 + max(depth(left[node]), depth(right[node]))

        assert depth(0) <= 3

    def test_min_leaf_respected(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(200, 3))
        y = rng.integers(0, 2, 200)
        tree = DecisionTreeClassifier(min_leaf=2).fit(X, y)
        feature, threshold, left, right, value = tree.tree_
        counts = np.zeros(len(feature), dtype=int)
        node = np.zeros(len(X), dtype=int)
        while True:
            internal = feature[node] >= 0
            if not internal.any():
                break
            rows = np.flatnonzero(internal)
            cur = node[rows]
            go_left = X[rows, feature[cur]] <= threshold[cur]
            node[rows] = np.where(go_left, left[cur], right[cur])
        for leaf in np.unique(node):
            assert (node == leaf).sum() >= 2

    def test_leaf_value_is_class_frequency(self):
        X = np.array([[0.0], [0.0], [0.0], [1.0], [1.0], [1.0], [1.0]])
        y = np.array([0, 0, 1, 1, 1, 1, 0])
        tree = DecisionTreeClassifier(max_depth=1).fit(X, y)
        p = tree.predict_proba(np.array([[0.0], [1.0]]))
        assert p[0] == pytest.approx(1 / 3)
        assert p[1] == pytest.approx(3 / 4)


class TestRandomForest:
    def test_mean_over_identical_handbuilt_stumps(self):
        stump = (np.array([0, -1, -1]), np.array([0.5, 0.0, 0.0]),
                 np.array([1, -1, -1]), np.array([2, -1, -1]),
                 np.array([0.5, 0.2, 0.9]))
        X = np.array([[0.0], [1.0]])
        assert tree_predict_proba(stump, X).tolist() == [0.2, 0.9]
        forest = RandomForestClassifier(n_trees=3)
        forest.trees_ = [stump, stump, stump]
        forest.n_features_ = 1
        assert forest.predict_proba(X) == pytest.approx([0.2, 0.9])

    def test_pure_data_gives_pure_forest(self):
        X = np.array([[0.0]] * 50 + [[1.0]] * 50)
        y = np.array([0] * 50 + [1] * 50)
        forest = RandomForestClassifier(n_trees=20, seed=1).fit(X, y)
        p = forest.predict_proba(np.array([[0.0], [1.0]]))
        assert p[0] == 0.0 and p[1] == 1.0

    def test_seed_determinism(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(100, 6))
        y = (X[:, 0] > 0).astype(int)
        p1 = RandomForestClassifier(n_trees=15, seed=9).fit(X, y).predict_proba(X)
        p2 = RandomForestClassifier(n_trees=15, seed=9).fit(X, y).predict_proba(X)
        assert np.array_equal(p1, p2)
        p3 = RandomForestClassifier(n_trees=15, seed=10).fit(X, y).predict_proba(X)
        assert not np.array_equal(p1, p3)


class TestGaussianNB:
    def test_decision_boundary_at_midpoint_of_symmetric_gaussians(self):
        X = np.array([[-3.0], [-2.0], [-1.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 0, 0, 1, 1, 1])
        nb = GaussianNaiveBayes().fit(X, y)
        assert nb.predict([[-0.01]])[0] == 0
        assert nb.predict([[0.01]])[0] == 1
        assert nb.predict_proba([[0.0]])[0] == pytest.approx(0.5)

    def test_far_region_posterior_saturates(self):
        X = np.array([[-3.0], [-2.0], [-1.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 0, 0, 1, 1, 1])
        nb = GaussianNaiveBayes().fit(X, y)
        assert nb.predict_proba([[10.0]])[0] == pytest.approx(1.0, abs=1e-6)
        assert nb.predict_proba([[-10.0]])[0] == pytest.approx(0.0, abs=1e-6)

    def test_variance_floor_handles_constant_feature(self):
        X = np.array([[0.0, 5.0], [1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
        y = np.array([0, 0, 1, 1])
        nb = GaussianNaiveBayes().fit(X, y)
        p = nb.predict_proba(X)
        assert np.isfinite(p).all()
        assert (nb.predict(X) == y).all()

    def test_single_class_training_degenerates_to_constant(self):
        X = np.array([[0.0], [1.0], [2.0]])
        y = np.array([1, 1, 1])
        nb = GaussianNaiveBayes().fit(X, y)
        assert (nb.predict_proba([[0.5], [7.0]]) == 1.0).all()


def finite_difference_gradient(X, y, w, b, l2, eps=1e-6):
    gw = np.zeros_like(w)
    for i in range(w.shape[0]):
        wp, wm = w.copy(), w.copy()
        wp[i] += eps
        wm[i] -= eps
        gw[i] = (LogisticRegressionGD.loss(X, y, wp, b, l2)
                 - LogisticRegressionGD.loss(X, y, wm, b, l2)) / (2 * eps)
    gb = (LogisticRegressionGD.loss(X, y, w, b + eps, l2)
          - LogisticRegressionGD.loss(X, y, w, b - eps, l2)) / (2 * eps)
    return gw, gb


class TestLogisticRegression:
    def test_gradient_matches_central_finite_differences(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            n, d = 12, 4
            X = rng.normal(size=(n, d))
            y = rng.integers(0, 2, n).astype(float)
            w = rng.normal(scale=0.5, size=d)
            b = float(rng.normal())
            gw, gb = LogisticRegressionGD.gradient(X, y, w, b, l2=1e-4)
            fw, fb = finite_difference_gradient(X, y, w, b, l2=1e-4)
            assert np.linalg.norm(gw - fw) / max(np.linalg.norm(fw), 1e-12) < 1e-5
            assert abs(gb - fb) / max(abs(fb), 1e-12) < 1e-5

    def test_zero_init_and_symmetric_output(self):
        X = np.zeros((4, 3))
        y = np.array([0, 1, 0, 1])
        lr = LogisticRegressionGD(epochs=10).fit(X, y)
        assert lr.predict_proba(np.zeros((1, 3)))[0] == pytest.approx(0.5)

    def test_learns_separable_problem(self):
        rng = np.random.default_rng(9)
        X = np.vstack([rng.normal(-2, 0.3, size=(40, 2)), rng.normal(2, 0.3, size=(40, 2))])
        y = np.array([0] * 40 + [1] * 40)
        lr = LogisticRegressionGD().fit(X, y)
        assert (lr.predict(X) == y).all()
