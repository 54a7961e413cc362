"""CART regression trees and a bootstrap-aggregated random forest."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._common import ModelError, as_matrix, as_target

LEAF = -1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    seed: int = 0
    max_features: str | float = "all"  # "all", "sqrt" or a fraction in (0, 1]
    min_leaf: int = 1
    max_depth: int | None = None
    bootstrap: bool = True
    n_jobs: int = 1

    kind = "forest"

    def __post_init__(self):
        problems = []
        if self.n_trees < 1:
            problems.append(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_leaf < 1:
            problems.append(f"min_leaf must be >= 1, got {self.min_leaf}")
        if self.max_depth is not None and self.max_depth < 0:
            problems.append(f"max_depth must be >= 0, got {self.max_depth}")
        mf = self.max_features
        if not (mf in ("all", "sqrt") or (isinstance(mf, (int, float)) and 0 < mf <= 1)):
            problems.append(f"max_features must be 'all', 'sqrt' or a fraction in (0, 1], got {mf!r}")
        if self.n_jobs < 1:
            problems.append(f"n_jobs must be >= 1, got {self.n_jobs}")
        if problems:
            raise ModelError("; ".join(problems))

    def n_candidate_features(self, d: int) -> int:
        if self.max_features == "all":
            return d
        if self.max_features == "sqrt":
            return max(1, int(math.sqrt(d)))
        return max(1, int(self.max_features * d))


@dataclass(frozen=True)
class Tree:
    """Flat binary tree; ``feature[i] == LEAF`` marks a leaf holding ``value[i]``.

    Rows with ``x[feature] <= threshold`` go left.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        node = np.zeros(X.shape[0], dtype=int)
        active = self.feature[node] != LEAF
        while active.any():
            rows = np.flatnonzero(active)
            nd = node[rows]
            go_left = X[rows, self.feature[nd]] <= self.threshold[nd]
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] != LEAF
        return self.value[node]

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("feature", "threshold", "left", "right", "value")}

    @classmethod
    def from_dict(cls, d: dict) -> Tree:
        ints = {k: np.asarray(d[k], dtype=int) for k in ("feature", "left", "right")}
        return cls(ints["feature"], np.asarray(d["threshold"], dtype=float), ints["left"], ints["right"],
                   np.asarray(d["value"], dtype=float))


def best_split(X: np.ndarray, y: np.ndarray, features, min_leaf: int = 1):
    """Best (feature, threshold, gain) over midpoints of consecutive distinct
    values, or None when no split lowers the squared error.

    ``gain`` is the drop in summed squared error (n times the weighted
    variance reduction). Gains within ``1e-12 * SSE`` of the maximum count as
    ties, resolved by the lower feature index and then the lower threshold.
    """
    n = y.size
    yc = y - y.mean()
    sse_parent = float(yc @ yc)
    atol = 1e-12 * max(sse_parent, 1e-300)
    feats = np.sort(np.asarray(list(features), dtype=int))
    order = np.argsort(X[:, feats], axis=0, kind="stable")
    xs = np.take_along_axis(X[:, feats], order, axis=0)
    ys = yc[order]
    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys**2, axis=0)
    counts = np.arange(1, n)[:, None]
    left_sum, left_sq = csum[:-1], csq[:-1]
    sse_left = left_sq - left_sum**2 / counts
    sse_right = (csq[-1] - left_sq) - (csum[-1] - left_sum) ** 2 / (n - counts)
    valid = (xs[:-1] < xs[1:]) & (counts >= min_leaf) & (n - counts >= min_leaf)
    gain = np.where(valid, sse_parent - sse_left - sse_right, -np.inf)
    if gain.size == 0:
        return None
    top = float(gain.max())
    if top <= atol:
        return None
    # column-major scan: lowest feature first, then lowest threshold
    k, col = np.argwhere((gain >= top - atol).T)[0][::-1]
    lo, hi = xs[k, col], xs[k + 1, col]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:  # adjacent floats
        thr = lo
    return int(feats[col]), float(thr), float(gain[k, col])


def fit_tree(X, y, config: ForestConfig = ForestConfig(), rng: np.random.Generator | None = None) -> Tree:
    X = as_matrix(X)
    y = as_target(y, X.shape[0])
    d = X.shape[1]
    m = config.n_candidate_features(d)
    if m < d and rng is None:
        raise ModelError("feature subsampling needs an rng")

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        for lst, v in ((feature, LEAF), (threshold, 0.0), (left, LEAF), (right, LEAF), (value, 0.0)):
            lst.append(v)
        return len(feature) - 1

    stack = [(new_node(), np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        ys = y[idx]
        # clipped: the mean of repeated bootstrap copies can round one ulp outside them
        value[node] = float(np.clip(ys.mean(), ys.min(), ys.max()))
        if (idx.size < 2 * config.min_leaf or np.all(ys == ys[0])
                or (config.max_depth is not None and depth >= config.max_depth)):
            continue
        feats = range(d) if m == d else rng.choice(d, size=m, replace=False)
        found = best_split(X[idx], ys, feats, config.min_leaf)
        if found is None:
            continue
        f, thr, _ = found
        go_left = X[idx, f] <= thr
        lnode, rnode = new_node(), new_node()
        feature[node], threshold[node], left[node], right[node] = f, thr, lnode, rnode
        # right pushed first so the left subtree is numbered first
        stack.append((rnode, idx[~go_left], depth + 1))
        stack.append((lnode, idx[go_left], depth + 1))

    return Tree(np.array(feature), np.array(threshold), np.array(left), np.array(right), np.array(value))


def tree_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent PCG64 stream for tree ``index``, derived with SeedSequence spawn keys."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[Tree, ...]
    n_features: int

    kind = "forest"

    def predict(self, X) -> np.ndarray:
        X = as_matrix(X, self.n_features)
        P = np.array([t.predict(X) for t in self.trees])
        # mean taken as offsets from the first tree: exact when all trees agree,
        # and clipped so rounding never leaves the range of the tree outputs
        mean = P[0] + (P - P[0]).mean(axis=0)
        return np.clip(mean, P.min(axis=0), P.max(axis=0))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_features": self.n_features, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> ForestModel:
        return cls(tuple(Tree.from_dict(t) for t in d["trees"]), int(d["n_features"]))


def fit_forest(X, y, config: ForestConfig = ForestConfig()) -> ForestModel:
    X = as_matrix(X)
    y = as_target(y, X.shape[0])
    n = X.shape[0]

    def grow(i: int) -> Tree:
        rng = tree_rng(config.seed, i)
        idx = rng.integers(0, n, size=n) if config.bootstrap else np.arange(n)
        return fit_tree(X[idx], y[idx], config, rng)

    if config.n_jobs > 1:
        with ThreadPoolExecutor(config.n_jobs) as pool:
            trees = tuple(pool.map(grow, range(config.n_trees)))
    else:
        trees = tuple(grow(i) for i in range(config.n_trees))
    return ForestModel(trees, X.shape[1])
