"""Descriptive statistics, Pearson correlation and a straight-line fit with
a mean-response confidence band."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.special import betainc


class StatsError(ValueError):
    pass


SUMMARY_ROWS = (
    ("Count", "count"),
    ("Mean", "mean"),
    ("Std Dev", "std_dev"),
    ("Min", "min"),
    ("25%", "q25"),
    ("Median", "median"),
    ("75%", "q75"),
    ("Max", "max"),
    ("Range", "range"),
    ("Variance", "variance"),
    ("Skewness", "skewness"),
    ("Kurtosis", "excess_kurtosis"),
)


@dataclass(frozen=True)
class DescriptiveSummary:
    count: int
    mean: float
    std_dev: float
    min: float
    q25: float
    median: float
    q75: float
    max: float
    range: float
    variance: float
    skewness: float
    excess_kurtosis: float

    def rows(self) -> list[tuple[str, float]]:
        """(label, value) pairs in the published table's row order."""
        return [(label, getattr(self, attr)) for label, attr in SUMMARY_ROWS]


def _as_vector(xs, min_len: int, what: str = "input") -> np.ndarray:
    x = np.asarray(xs, dtype=float).ravel()
    if x.size < min_len:
        raise StatsError(f"{what} needs at least {min_len} values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise StatsError(f"{what} contains non-finite values")
    return x


def quantile(xs, p: float) -> float:
    """Linear interpolation between order statistics at h = (n-1)p."""
    if not 0.0 <= p <= 1.0:
        raise StatsError(f"quantile level must lie in [0, 1], got {p}")
    x = np.sort(_as_vector(xs, 1))
    h = (x.size - 1) * p
    lo = math.floor(h)
    if lo >= x.size - 1:
        return float(x[-1])
    return float(x[lo] + (h - lo) * (x[lo + 1] - x[lo]))


def _central_moments(x: np.ndarray):
    d = x - x.mean()
    m2 = np.mean(d**2)
    if m2 == 0.0:
        raise StatsError("zero variance")
    return d, m2


def skewness(xs) -> float:
    """Adjusted Fisher-Pearson sample skewness G1."""
    x = _as_vector(xs, 3)
    n = x.size
    d, m2 = _central_moments(x)
    g1 = np.mean(d**3) / m2**1.5
    return float(g1 * math.sqrt(n * (n - 1)) / (n - 2))


def excess_kurtosis(xs) -> float:
    """Bias-corrected excess kurtosis G2."""
    x = _as_vector(xs, 4)
    n = x.size
    d, m2 = _central_moments(x)
    g2 = np.mean(d**4) / m2**2 - 3.0
    return float((n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * g2 + 6.0))


def summarize(xs) -> DescriptiveSummary:
    x = _as_vector(xs, 4)
    mean = float(np.mean(x))
    var = float(np.sum((x - mean) ** 2) / (x.size - 1))
    lo, hi = float(x.min()), float(x.max())
    if var == 0.0:
        skew = kurt = float("nan")
    else:
        skew, kurt = skewness(x), excess_kurtosis(x)
    return DescriptiveSummary(
        count=int(x.size),
        mean=mean,
        std_dev=math.sqrt(var),
        min=lo,
        q25=quantile(x, 0.25),
        median=quantile(x, 0.5),
        q75=quantile(x, 0.75),
        max=hi,
        range=hi - lo,
        variance=var,
        skewness=skew,
        excess_kurtosis=kurt,
    )


def pearson(xs, ys) -> float:
    x = _as_vector(xs, 2, "x")
    y = _as_vector(ys, 2, "y")
    if x.size != y.size:
        raise StatsError(f"length mismatch: {x.size} vs {y.size}")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = np.dot(dx, dx), np.dot(dy, dy)
    if sxx == 0.0 or syy == 0.0:
        raise StatsError("correlation undefined for a constant input")
    r = np.dot(dx, dy) / math.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple[str, ...]
    r: np.ndarray

    def long_form(self) -> list[tuple[str, str, float]]:
        return [(a, b, float(self.r[i, j])) for i, a in enumerate(self.labels) for j, b in enumerate(self.labels)]


def correlation_matrix(columns: Mapping[str, np.ndarray]) -> CorrelationMatrix:
    labels = tuple(columns)
    if len(labels) < 2:
        raise StatsError("need at least two columns")
    k = len(labels)
    r = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            r[i, j] = r[j, i] = pearson(columns[labels[i]], columns[labels[j]])
    return CorrelationMatrix(labels, r)


def student_t_cdf(t: float, df: float) -> float:
    x = df / (df + t * t)
    tail = 0.5 * betainc(df / 2.0, 0.5, x)
    return 1.0 - tail if t >= 0 else tail


def student_t_quantile(p: float, df: float, tol: float = 1e-10) -> float:
    """Invert the Student-t CDF by bisection."""
    if not 0.0 < p < 1.0:
        raise StatsError(f"probability must lie in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -student_t_quantile(1.0 - p, df, tol)
    lo, hi = 0.0, 1.0
    while student_t_cdf(hi, df) < p:
        lo, hi = hi, hi * 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if student_t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r: float
    residual_std: float
    confidence: float
    t_quantile: float
    x_mean: float
    sxx: float
    n: int

    def predict(self, x) -> np.ndarray:
        return self.intercept + self.slope * np.asarray(x, dtype=float)

    def half_width(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.t_quantile * self.residual_std * np.sqrt(1.0 / self.n + (x - self.x_mean) ** 2 / self.sxx)

    def band(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(fit, lower, upper) of the mean-response interval at each x."""
        fit = self.predict(x)
        hw = self.half_width(x)
        return fit, fit - hw, fit + hw


def fit_line_with_ci(xs, ys, confidence: float = 0.95) -> LineFit:
    if not 0.0 < confidence < 1.0:
        raise StatsError(f"confidence must lie in (0, 1), got {confidence}")
    x = _as_vector(xs, 3, "x")
    y = _as_vector(ys, 3, "y")
    if x.size != y.size:
        raise StatsError(f"length mismatch: {x.size} vs {y.size}")
    n = x.size
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise StatsError("x is constant; slope undefined")
    slope = float(np.dot(dx, y - ym) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    s = math.sqrt(float(np.dot(resid, resid)) / (n - 2))
    syy = float(np.dot(y - ym, y - ym))
    r = float(np.dot(dx, y - ym) / math.sqrt(sxx * syy)) if syy > 0 else float("nan")
    t = student_t_quantile(1.0 - (1.0 - confidence) / 2.0, n - 2)
    return LineFit(slope, intercept, r, s, confidence, t, float(xm), sxx, n)
