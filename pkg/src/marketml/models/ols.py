"""Ordinary least squares with an intercept, solved by Householder QR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from ._common import ModelError, as_matrix, as_target


@dataclass(frozen=True)
class OLSConfig:
    kind = "ols"
    # Columns whose |R_jj| falls below rank_tol * max|R_jj| count as dependent.
    rank_tol: float = 1e-10


@dataclass(frozen=True)
class OLSModel:
    coef: np.ndarray
    intercept: float

    kind = "ols"

    def predict(self, X) -> np.ndarray:
        X = as_matrix(X, self.coef.size)
        return X @ self.coef + self.intercept

    def to_dict(self) -> dict:
        return {"kind": self.kind, "coef": self.coef.tolist(), "intercept": self.intercept}

    @classmethod
    def from_dict(cls, d: dict) -> OLSModel:
        return cls(np.asarray(d["coef"], dtype=float), float(d["intercept"]))


def fit_ols(X, y, config: OLSConfig = OLSConfig()) -> OLSModel:
    X = as_matrix(X)
    y = as_target(y, X.shape[0])
    n, d = X.shape
    if n < d + 1:
        raise ModelError(f"OLS needs at least {d + 1} rows for {d} features, got {n}")
    # centring removes the intercept column and improves conditioning
    x_mean, y_mean = X.mean(axis=0), y.mean()
    Xc = X - x_mean
    Q, R = np.linalg.qr(Xc, mode="reduced")
    diag = np.abs(np.diag(R))
    scale = max(diag.max(initial=0.0), np.linalg.norm(Xc, ord=np.inf), 1e-300)
    bad = np.flatnonzero(diag <= config.rank_tol * scale)
    if bad.size:
        raise ModelError(f"design matrix is rank deficient at column {int(bad[0])}")
    coef = solve_triangular(R, Q.T @ (y - y_mean))
    return OLSModel(coef, float(y_mean - x_mean @ coef))
