"""Lag/rolling feature assembly, train/test splitting and standardization.

Missing slots produced by :func:`lag` and :func:`rolling_stats` are NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .market_data import AlignedPair

LAGS = (1, 2, 3)
WINDOW = 3


class FeatureError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureMatrix:
    column_names: tuple[str, ...]
    rows: np.ndarray
    target: np.ndarray
    row_dates: tuple

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.column_names):
            raise FeatureError("rows must be a matrix with one column per name")
        if len(self.target) != self.rows.shape[0] or len(self.row_dates) != self.rows.shape[0]:
            raise FeatureError("target/row_dates length must equal the row count")

    def __len__(self):
        return self.rows.shape[0]

    def take(self, idx) -> FeatureMatrix:
        idx = np.asarray(idx, dtype=int)
        return FeatureMatrix(self.column_names, self.rows[idx], self.target[idx], tuple(self.row_dates[i] for i in idx))


def lag(xs, k: int) -> np.ndarray:
    x = np.asarray(xs, dtype=float)
    if k < 1 or k >= x.size:
        raise FeatureError(f"lag {k} invalid for a series of length {x.size}")
    out = np.full(x.size, np.nan)
    out[k:] = x[:-k]
    return out


def rolling_stats(xs, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Trailing mean and sample standard deviation over ``w`` points."""
    x = np.asarray(xs, dtype=float)
    if w < 2 or w > x.size:
        raise FeatureError(f"window {w} invalid for a series of length {x.size}")
    windows = np.lib.stride_tricks.sliding_window_view(x, w)
    means = np.full(x.size, np.nan)
    stds = np.full(x.size, np.nan)
    means[w - 1 :] = windows.mean(axis=1)
    stds[w - 1 :] = windows.std(axis=1, ddof=1)
    return means, stds


def assemble(pair: AlignedPair, lags=LAGS, window: int = WINDOW) -> FeatureMatrix:
    """Build X from the A-market close (value, lags, rolling mean/std) and
    take the B-market close as target; rows with any gap are dropped."""
    a, b = pair.series_a, pair.series_b
    prune = max(max(lags), window - 1)
    if len(a) - prune < 2:
        raise FeatureError(f"{len(a)} aligned rows leave fewer than 2 after dropping {prune}")
    name = "A"
    cols = {name: a}
    for k in lags:
        cols[f"{name}_lag_{k}"] = lag(a, k)
    cols[f"{name}_roll_mean_{window}"], cols[f"{name}_roll_std_{window}"] = rolling_stats(a, window)
    X = np.column_stack(list(cols.values()))
    keep = ~np.isnan(X).any(axis=1) & ~np.isnan(b)
    return FeatureMatrix(
        column_names=tuple(cols),
        rows=X[keep],
        target=np.asarray(b, dtype=float)[keep],
        row_dates=tuple(d for d, k in zip(pair.dates, keep) if k),
    )


class SplitMode(str, Enum):
    SHUFFLED = "shuffled"
    CHRONOLOGICAL = "chronological"


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    mode: SplitMode = SplitMode.SHUFFLED
    seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise FeatureError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        object.__setattr__(self, "mode", SplitMode(self.mode))

    def n_train(self, n: int) -> int:
        return math.ceil((1.0 - self.test_fraction) * n - 1e-9)


def split(fm: FeatureMatrix, spec: SplitSpec) -> tuple[FeatureMatrix, FeatureMatrix]:
    n = len(fm)
    n_train = spec.n_train(n)
    if n_train < 1 or n_train >= n:
        raise FeatureError(f"split of {n} rows at test_fraction={spec.test_fraction} leaves an empty partition")
    if spec.mode is SplitMode.SHUFFLED:
        order = np.random.default_rng(spec.seed).permutation(n)
    else:
        order = np.arange(n)
    return fm.take(order[:n_train]), fm.take(order[n_train:])


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, fm: FeatureMatrix) -> FeatureMatrix:
        if fm.rows.shape[1] != self.mean.size:
            raise FeatureError(f"expected {self.mean.size} columns, got {fm.rows.shape[1]}")
        return replace(fm, rows=(fm.rows - self.mean) / self.std)

    def inverse(self, fm: FeatureMatrix) -> FeatureMatrix:
        if fm.rows.shape[1] != self.mean.size:
            raise FeatureError(f"expected {self.mean.size} columns, got {fm.rows.shape[1]}")
        return replace(fm, rows=fm.rows * self.std + self.mean)


def standardize_fit(train: FeatureMatrix) -> Standardizer:
    """Per-column mean and sample std of the training rows. The target is
    left untouched."""
    X = train.rows
    if X.shape[0] < 2:
        raise FeatureError("need at least two training rows to standardize")
    mean = X.mean(axis=0)
    std = X.std(axis=0, ddof=1)
    bad = [train.column_names[j] for j in np.flatnonzero(std == 0)]
    if bad:
        raise FeatureError(f"constant training column(s): {', '.join(bad)}")
    return Standardizer(mean, std)


def standardize_apply(s: Standardizer, fm: FeatureMatrix) -> FeatureMatrix:
    return s.transform(fm)
