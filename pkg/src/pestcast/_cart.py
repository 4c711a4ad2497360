"""Flat-array CART builders, JIT-compiled for throughput.

Trees are grown iteratively with an explicit stack over an index buffer
that is partitioned in place. Nodes live in parallel arrays so grown
trees cross the JIT boundary cheaply and predictions can be vectorized
in plain numpy. Forests grow trees in parallel; every tree's bootstrap
rows and split-sampling seed are fixed up front, so results do not
depend on thread scheduling.

The kernel works on the transposed feature matrix (features x rows) so
each split-search scan stays inside one contiguous row.

Split rule: exact best-split search by Gini impurity over the candidate
features, midpoint thresholds, both children at least ``min_leaf`` rows.
Ties break toward the lower feature index and lower threshold, which
keeps training deterministic.
"""

import numpy as np
import numba
from numba import njit, prange

# the default TBB probe warns on older system TBB; OMP is always present here
numba.config.THREADING_LAYER = "omp"

NO_FEATURE = -1

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _next_u64(state):
    # splitmix64
    state[0] = state[0] + _GAMMA
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _sort_pairs(xs, ys, lo0, hi0, spans):
    """In-place quicksort of xs[lo0:hi0+1] carrying ys along.

    ``spans`` is a scratch (k, 2) int64 stack. Unstable, which is fine:
    the split scan only looks at boundaries between distinct values, so
    the order inside runs of equal values never matters.
    """
    top = 0
    spans[top, 0] = lo0
    spans[top, 1] = hi0
    top += 1
    while top > 0:
        top -= 1
        lo = spans[top, 0]
        hi = spans[top, 1]
        while hi - lo > 32:
            mid = (lo + hi) >> 1
            # median-of-three pivot, endpoints pre-ordered
            if xs[mid] < xs[lo]:
                tx = xs[mid]; xs[mid] = xs[lo]; xs[lo] = tx
                ty = ys[mid]; ys[mid] = ys[lo]; ys[lo] = ty
            if xs[hi] < xs[lo]:
                tx = xs[hi]; xs[hi] = xs[lo]; xs[lo] = tx
                ty = ys[hi]; ys[hi] = ys[lo]; ys[lo] = ty
            if xs[hi] < xs[mid]:
                tx = xs[hi]; xs[hi] = xs[mid]; xs[mid] = tx
                ty = ys[hi]; ys[hi] = ys[mid]; ys[mid] = ty
            pivot = xs[mid]
            i = lo
            j = hi
            while i <= j:
                while xs[i] < pivot:
                    i += 1
                while xs[j] > pivot:
                    j -= 1
                if i <= j:
                    tx = xs[i]; xs[i] = xs[j]; xs[j] = tx
                    ty = ys[i]; ys[i] = ys[j]; ys[j] = ty
                    i += 1
                    j -= 1
            # push the larger side, keep iterating on the smaller
            if j - lo < hi - i:
                spans[top, 0] = i
                spans[top, 1] = hi
                top += 1
                hi = j
            else:
                spans[top, 0] = lo
                spans[top, 1] = j
                top += 1
                lo = i
        # insertion sort for the remaining short span
        for i in range(lo + 1, hi + 1):
            xv = xs[i]
            yv = ys[i]
            j = i - 1
            while j >= lo and xs[j] > xv:
                xs[j + 1] = xs[j]
                ys[j + 1] = ys[j]
                j -= 1
            xs[j + 1] = xv
            ys[j + 1] = yv


@njit(cache=True)
def _grow_into(XT, y, max_depth, min_leaf, max_features, rng_seed,
               feature, threshold, left, right, value):
    """Grow one tree into preallocated node arrays; returns node count.

    ``XT`` is the transposed training matrix, shape (n_features, n_rows).
    """
    d, n = XT.shape

    idx = np.arange(n)
    stack = np.empty((2 * max_depth + 4, 4), dtype=np.int64)
    top = 0
    stack[top, 0] = 0
    stack[top, 1] = 0
    stack[top, 2] = n
    stack[top, 3] = 0
    top += 1
    n_nodes = 1

    rng_state = np.empty(1, dtype=np.uint64)
    rng_state[0] = np.uint64(rng_seed)
    feats = np.empty(d, dtype=np.int64)
    cand = np.empty(d, dtype=np.int64)
    xs = np.empty(n, dtype=np.float64)
    ys = np.empty(n, dtype=np.int64)
    spans = np.empty((80, 2), dtype=np.int64)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        n_node = end - start

        pos = 0
        for i in range(n_node):
            pos += y[idx[start + i]]
        value[node] = pos / n_node
        feature[node] = NO_FEATURE

        if depth >= max_depth or n_node < 2 * min_leaf or pos == 0 or pos == n_node:
            continue

        # candidate features, ascending for deterministic tie-breaks
        if max_features < d:
            for f in range(d):
                feats[f] = f
            for i in range(max_features):
                j = i + int(_next_u64(rng_state) % np.uint64(d - i))
                tmp = feats[i]
                feats[i] = feats[j]
                feats[j] = tmp
            n_cand = max_features
            for i in range(n_cand):
                cand[i] = feats[i]
            cand[:n_cand].sort()
        else:
            n_cand = d
            for f in range(d):
                cand[f] = f

        best_gini = np.inf
        best_feature = NO_FEATURE
        best_threshold = 0.0

        for ci in range(n_cand):
            f = cand[ci]
            row_f = XT[f]
            lo_v = row_f[idx[start]]
            hi_v = lo_v
            for i in range(n_node):
                src = idx[start + i]
                v = row_f[src]
                xs[i] = v
                ys[i] = y[src]
                if v < lo_v:
                    lo_v = v
                elif v > hi_v:
                    hi_v = v
            if lo_v == hi_v:
                continue
            _sort_pairs(xs, ys, 0, n_node - 1, spans)
            pos_prefix = 0
            prev = xs[0]
            for i in range(n_node - 1):
                pos_prefix += ys[i]
                cur = xs[i + 1]
                if cur == prev:
                    continue
                n_l = i + 1
                n_r = n_node - n_l
                if n_l >= min_leaf and n_r >= min_leaf:
                    p_l = pos_prefix / n_l
                    p_r = (pos - pos_prefix) / n_r
                    g = (n_l * 2.0 * p_l * (1.0 - p_l)
                         + n_r * 2.0 * p_r * (1.0 - p_r)) / n_node
                    if g < best_gini:
                        best_gini = g
                        best_feature = f
                        best_threshold = prev + 0.5 * (cur - prev)
                prev = cur

        if best_feature == NO_FEATURE:
            continue

        row_b = XT[best_feature]
        lo = start
        hi = end - 1
        while lo <= hi:
            if row_b[idx[lo]] <= best_threshold:
                lo += 1
            else:
                tmp = idx[lo]
                idx[lo] = idx[hi]
                idx[hi] = tmp
                hi -= 1
        mid = lo

        feature[node] = best_feature
        threshold[node] = best_threshold
        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        left[node] = left_id
        right[node] = right_id

        stack[top, 0] = left_id
        stack[top, 1] = start
        stack[top, 2] = mid
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = right_id
        stack[top, 1] = mid
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1

    return n_nodes


@njit(cache=True)
def grow_tree(XT, y, max_depth, min_leaf, max_features, rng_seed):
    """Grow one CART; returns (feature, threshold, left, right, value)."""
    n = XT.shape[1]
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, NO_FEATURE, dtype=np.int64)
    threshold = np.zeros(max_nodes, dtype=np.float64)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    value = np.zeros(max_nodes, dtype=np.float64)
    n_nodes = _grow_into(XT, y, max_depth, min_leaf, max_features, rng_seed,
                         feature, threshold, left, right, value)
    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(), value[:n_nodes].copy())


@njit(cache=True, parallel=True)
def grow_forest(X, y, boots, seeds, max_depth, min_leaf, max_features):
    """Grow ``boots.shape[0]`` trees in parallel from fixed bootstrap rows."""
    n_trees = boots.shape[0]
    n = boots.shape[1]
    d = X.shape[1]
    max_nodes = 2 * n + 1
    features = np.full((n_trees, max_nodes), NO_FEATURE, dtype=np.int64)
    thresholds = np.zeros((n_trees, max_nodes), dtype=np.float64)
    lefts = np.full((n_trees, max_nodes), -1, dtype=np.int64)
    rights = np.full((n_trees, max_nodes), -1, dtype=np.int64)
    values = np.zeros((n_trees, max_nodes), dtype=np.float64)
    n_nodes = np.zeros(n_trees, dtype=np.int64)
    for t in prange(n_trees):
        XbT = np.empty((d, n), dtype=np.float64)
        yb = np.empty(n, dtype=np.int64)
        for i in range(n):
            src = boots[t, i]
            yb[i] = y[src]
            for f in range(d):
                XbT[f, i] = X[src, f]
        n_nodes[t] = _grow_into(XbT, yb, max_depth, min_leaf, max_features,
                                seeds[t], features[t], thresholds[t],
                                lefts[t], rights[t], values[t])
    return features, thresholds, lefts, rights, values, n_nodes


def tree_predict_proba(tree, X):
    """Vectorized positive-class probability for every row of X."""
    feature, threshold, left, right, value = tree
    node = np.zeros(X.shape[0], dtype=np.int64)
    while True:
        internal = feature[node] >= 0
        if not internal.any():
            break
        rows = np.flatnonzero(internal)
        cur = node[rows]
        f = feature[cur]
        go_left = X[rows, f] <= threshold[cur]
        node[rows] = np.where(go_left, left[cur], right[cur])
    return value[node]
