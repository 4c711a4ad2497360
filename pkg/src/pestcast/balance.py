"""Class balancing by synthetic minority oversampling (SMOTE).

New minority points are placed uniformly at random on the line segment
between a minority instance and one of its k nearest minority neighbors
until the classes are equal. Neighbor distances are measured in z-scored
feature space (fit on the minority class only) so no single feature's
scale dominates; the synthetic points themselves live in the original
feature space.
"""

from dataclasses import dataclass

import numpy as np

from .base import BaseEstimator, StandardScaler, check_labels, check_matrix


@dataclass
class BalancedSet:
    instances: list
    synthetic_flags: list
    # indices into the original instance list of each synthetic point's parents
    parent_pairs: list


class SmoteOversampler(BaseEstimator):
    """Oversample the minority class until both classes are equal.

    Parameters
    ----------
    k : int
        Number of nearest minority neighbors to draw from (capped at
        minority size - 1).
    seed : int
        Seed for the sampling stream; identical inputs and seed give
        identical output.
    """

    def __init__(self, k=5, seed=0):
        self.k = k
        self.seed = seed

    def fit_resample(self, X, y):
        """Return (X_out, y_out, synthetic_mask, parent_pairs).

        The first len(X) rows of X_out are the originals, in order;
        synthetic rows follow. ``parent_pairs`` holds (i, j) row indices
        into X for each synthetic row.
        """
        X = check_matrix(X)
        y = check_labels(y, X.shape[0])
        if self.k < 1:
            raise ValueError("k must be >= 1")
        n_pos = int((y == 1).sum())
        n_neg = int((y == 0).sum())
        if n_pos == 0 or n_neg == 0:
            raise ValueError("SMOTE requires both classes to be present")
        if n_pos == n_neg:
            mask = np.zeros(X.shape[0], dtype=bool)
            return X.copy(), y.copy(), mask, []

        minority_label = 1 if n_pos < n_neg else 0
        deficit = abs(n_pos - n_neg)
        minority_idx = np.flatnonzero(y == minority_label)
        if minority_idx.shape[0] < 2:
            raise ValueError("SMOTE needs at least 2 minority instances")

        neighbors = self._minority_neighbors(X[minority_idx])
        rng = np.random.default_rng(np.random.SeedSequence([self.seed]))
        order = rng.permutation(minority_idx.shape[0])

        rows = []
        pairs = []
        for t in range(deficit):
            pos = int(order[t % order.shape[0]])
            nn_pos = int(neighbors[pos][int(rng.integers(0, neighbors.shape[1]))])
            a = X[minority_idx[pos]]
            b = X[minority_idx[nn_pos]]
            u = rng.random()
            rows.append(a + u * (b - a))
            pairs.append((int(minority_idx[pos]), int(minority_idx[nn_pos])))

        X_out = np.vstack([X, np.array(rows)])
        y_out = np.concatenate([y, np.full(deficit, minority_label, dtype=y.dtype)])
        mask = np.zeros(X_out.shape[0], dtype=bool)
        mask[X.shape[0]:] = True
        return X_out, y_out, mask, pairs

    def _minority_neighbors(self, M):
        """k nearest neighbors within the minority class, z-scored distances,
        distance ties broken by lower row index."""
        Z = StandardScaler().fit_transform(M)
        sq = (Z * Z).sum(axis=1)
        d2 = sq[:, None] - 2.0 * (Z @ Z.T) + sq[None, :]
        np.fill_diagonal(d2, np.inf)
        order = np.argsort(d2, axis=1, kind="stable")
        k_eff = min(self.k, M.shape[0] - 1)
        return order[:, :k_eff]


def smote(instances, k=5, seed=0):
    """Balance a list of LabeledInstance by SMOTE; see SmoteOversampler."""
    from .features import LabeledInstance

    if not instances:
        raise ValueError("smote: empty instance list")
    X = np.array([inst.features for inst in instances])
    y = np.array([inst.label for inst in instances])
    sampler = SmoteOversampler(k=k, seed=seed)
    X_out, y_out, mask, pairs = sampler.fit_resample(X, y)

    out = list(instances)
    for row in range(len(instances), X_out.shape[0]):
        out.append(LabeledInstance(
            station_id="synthetic", year=0, month=0, score=float("nan"),
            label=int(y_out[row]), features=X_out[row]))
    return BalancedSet(instances=out, synthetic_flags=list(mask), parent_pairs=pairs)
