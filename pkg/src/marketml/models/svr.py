"""Epsilon-insensitive support vector regression trained by SMO.

The dual is solved in the stacked 2n-variable form

    min_a  1/2 a'Qa + p'a   s.t.  s'a = 0,  0 <= a <= C

with a = [alpha; alpha*], s = [+1...; -1...], p = [eps - y; eps + y] and
Q_tu = s_t s_u K(x_t, x_u). Each step updates the pair chosen by the
maximal-violation rule for the first index and the largest guaranteed
objective decrease (second-order information) for the second. The fitted
function is f(x) = sum_i beta_i K(x_i, x) + b with beta = alpha - alpha*.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._common import ModelError, as_matrix, as_target

log = logging.getLogger(__name__)

TAU = 1e-12


class Kernel(str, Enum):
    LINEAR = "linear"
    POLY = "poly"


@dataclass(frozen=True)
class SVRConfig:
    kernel: Kernel = Kernel.LINEAR
    c: float = 1.0
    epsilon: float = 0.1
    gamma: float | str = "scale"
    degree: int = 3
    coef0: float = 0.0
    tol: float = 1e-3
    # cap on pair updates, expressed in passes over the 2n dual variables
    max_passes: int = 1000

    kind = "svr"

    def __post_init__(self):
        object.__setattr__(self, "kernel", Kernel(self.kernel))
        problems = []
        if not self.c > 0:
            problems.append(f"C must be > 0, got {self.c}")
        if not self.epsilon >= 0:
            problems.append(f"epsilon must be >= 0, got {self.epsilon}")
        if self.gamma != "scale" and not (isinstance(self.gamma, (int, float)) and self.gamma > 0):
            problems.append(f"gamma must be 'scale' or > 0, got {self.gamma!r}")
        if self.degree < 1:
            problems.append(f"degree must be >= 1, got {self.degree}")
        if not self.tol > 0:
            problems.append(f"tol must be > 0, got {self.tol}")
        if self.max_passes < 1:
            problems.append(f"max_passes must be >= 1, got {self.max_passes}")
        if problems:
            raise ModelError("; ".join(problems))


def kernel_matrix(U, V, kernel: Kernel, gamma: float = 1.0, degree: int = 3, coef0: float = 0.0) -> np.ndarray:
    G = np.asarray(U) @ np.asarray(V).T
    if kernel is Kernel.LINEAR:
        return G
    return (gamma * G + coef0) ** degree


def scale_gamma(X: np.ndarray) -> float:
    var = X.var()
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0


@dataclass(frozen=True)
class SVRModel:
    support_vectors: np.ndarray
    beta: np.ndarray
    b: float
    kernel: Kernel
    gamma: float
    degree: int
    coef0: float
    converged: bool
    n_iter: int
    # full per-sample dual variables, kept for certificates
    alpha: np.ndarray
    alpha_star: np.ndarray

    kind = "svr"

    def decision(self, X) -> np.ndarray:
        X = as_matrix(X, self.support_vectors.shape[1])
        if self.beta.size == 0:
            return np.full(X.shape[0], self.b)
        K = kernel_matrix(X, self.support_vectors, self.kernel, self.gamma, self.degree, self.coef0)
        return K @ self.beta + self.b

    predict = decision

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "kernel": self.kernel.value,
            "gamma": self.gamma,
            "degree": self.degree,
            "coef0": self.coef0,
            "b": self.b,
            "beta": self.beta.tolist(),
            "support_vectors": self.support_vectors.tolist(),
            "converged": self.converged,
            "n_iter": self.n_iter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> SVRModel:
        beta = np.asarray(d["beta"], dtype=float)
        sv = np.asarray(d["support_vectors"], dtype=float).reshape(beta.size, -1)
        pos, neg = np.clip(beta, 0, None), np.clip(-beta, 0, None)
        return cls(sv, beta, float(d["b"]), Kernel(d["kernel"]), float(d["gamma"]), int(d["degree"]),
                   float(d["coef0"]), bool(d["converged"]), int(d["n_iter"]), pos, neg)


class _Solver:
    def __init__(self, K: np.ndarray, y: np.ndarray, c: float, eps: float, tol: float, max_iter: int):
        n = y.size
        self.n = n
        self.c = c
        self.tol = tol
        self.max_iter = max_iter
        self.s = np.concatenate([np.ones(n), -np.ones(n)])
        self.p = np.concatenate([eps - y, eps + y])
        KK = np.block([[K, K], [K, K]])
        self.Q = self.s[:, None] * self.s[None, :] * KK
        self.QD = np.diag(self.Q).copy()
        self.a = np.zeros(2 * n)
        self.G = self.p.copy()

    def _select(self):
        a, s, G, C = self.a, self.s, self.G, self.c
        up = ((s > 0) & (a < C)) | ((s < 0) & (a > 0))
        low = ((s > 0) & (a > 0)) | ((s < 0) & (a < C))
        mG = -s * G
        if not up.any() or not low.any():
            return None, None, 0.0
        i = int(np.flatnonzero(up)[np.argmax(mG[up])])
        g_max = mG[i]
        g_min = mG[low].min()
        gap = g_max - g_min
        if gap < self.tol:
            return None, None, gap
        cand = low & (mG < g_max)
        idx = np.flatnonzero(cand)
        b_it = g_max - mG[idx]
        a_it = self.QD[i] + self.QD[idx] - 2.0 * s[i] * s[idx] * self.Q[i, idx]
        a_it = np.where(a_it > 0, a_it, TAU)
        j = int(idx[np.argmin(-(b_it**2) / a_it)])
        return i, j, gap

    def _update(self, i: int, j: int):
        a, s, G, Q, C = self.a, self.s, self.G, self.Q, self.c
        ai_old, aj_old = a[i], a[j]
        if s[i] != s[j]:
            quad = max(self.QD[i] + self.QD[j] + 2.0 * Q[i, j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if diff > 0:
                if a[j] < 0:
                    a[j], a[i] = 0.0, diff
            elif a[i] < 0:
                a[i], a[j] = 0.0, -diff
            if diff > 0:
                if a[i] > C:
                    a[i], a[j] = C, C - diff
            elif a[j] > C:
                a[j], a[i] = C, C + diff
        else:
            quad = max(self.QD[i] + self.QD[j] - 2.0 * Q[i, j], TAU)
            delta = (G[i] - G[j]) / quad
            total = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if total > C:
                if a[i] > C:
                    a[i], a[j] = C, total - C
            elif a[j] < 0:
                a[j], a[i] = 0.0, total
            if total > C:
                if a[j] > C:
                    a[j], a[i] = C, total - C
            elif a[i] < 0:
                a[i], a[j] = 0.0, total
        G += Q[:, i] * (a[i] - ai_old) + Q[:, j] * (a[j] - aj_old)

    def solve(self):
        it = 0
        while it < self.max_iter:
            i, j, _ = self._select()
            if i is None:
                return True, it
            self._update(i, j)
            it += 1
        i, _, _ = self._select()
        return i is None, it

    def bias(self) -> float:
        a, s, C = self.a, self.s, self.c
        yG = s * self.G
        at_upper = a >= C
        at_lower = a <= 0
        free = ~at_upper & ~at_lower
        if free.any():
            rho = yG[free].mean()
        else:
            ub_mask = (at_upper & (s < 0)) | (at_lower & (s > 0))
            lb_mask = (at_upper & (s > 0)) | (at_lower & (s < 0))
            ub = yG[ub_mask].min() if ub_mask.any() else np.inf
            lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
            rho = 0.5 * (ub + lb)
        return float(-rho)


def fit_svr(X, y, config: SVRConfig = SVRConfig()) -> SVRModel:
    X = as_matrix(X)
    y = as_target(y, X.shape[0])
    n = X.shape[0]
    if n < 2:
        raise ModelError("SVR needs at least 2 samples")
    gamma = scale_gamma(X) if config.gamma == "scale" else float(config.gamma)
    K = kernel_matrix(X, X, config.kernel, gamma, config.degree, config.coef0)
    if not np.all(np.isfinite(K)):
        raise ModelError("kernel matrix has non-finite entries")

    solver = _Solver(K, y, config.c, config.epsilon, config.tol, config.max_passes * 2 * n)
    converged, n_iter = solver.solve()
    if not converged:
        log.warning("SMO stopped after %d updates without meeting tol=%g", n_iter, config.tol)
    b = solver.bias()
    alpha, alpha_star = solver.a[:n].copy(), solver.a[n:].copy()
    # alpha_i * alpha*_i = 0 at any optimum; strip a common part left by finite tolerance
    common = np.minimum(alpha, alpha_star)
    alpha -= common
    alpha_star -= common
    beta = alpha - alpha_star
    sv = beta != 0
    return SVRModel(X[sv].copy(), beta[sv], b, config.kernel, gamma, config.degree, config.coef0,
                    converged, n_iter, alpha, alpha_star)


def dual_objective(beta, K, y, epsilon: float) -> float:
    """1/2 beta'K beta - y'beta + eps * sum|beta| (to be minimised)."""
    beta = np.asarray(beta, dtype=float)
    return float(0.5 * beta @ K @ beta - np.asarray(y) @ beta + epsilon * np.abs(beta).sum())


def kkt_violations(model: SVRModel, X, y, c: float, epsilon: float) -> np.ndarray:
    """Per-sample violation of the optimality conditions at the fitted bias.

    With residual r = y - f(x): alpha = 0 needs r <= eps, free alpha needs
    r = eps, alpha = C needs r >= eps; mirrored with -eps for alpha*.
    """
    r = as_target(y, len(model.alpha)) - model.decision(X)

    def side(a, r_):
        return np.where(a <= 0, np.maximum(0.0, r_ - epsilon),
                        np.where(a >= c, np.maximum(0.0, epsilon - r_), np.abs(r_ - epsilon)))

    return np.maximum(side(model.alpha, r), side(model.alpha_star, -r))
