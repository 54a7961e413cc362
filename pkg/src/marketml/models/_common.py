import numpy as np


class ModelError(ValueError):
    pass


def as_matrix(X, n_features: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ModelError(f"expected a non-empty 2-D feature matrix, got shape {X.shape}")
    if n_features is not None and X.shape[1] != n_features:
        raise ModelError(f"expected {n_features} features, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ModelError("feature matrix contains non-finite values")
    return X


def as_target(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if y.size != n:
        raise ModelError(f"target has {y.size} values for {n} rows")
    if not np.all(np.isfinite(y)):
        raise ModelError("target contains non-finite values")
    return y
