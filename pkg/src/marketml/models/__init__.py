"""From-scratch regressors sharing a ``fit_*(X, y, config) -> model`` and
``model.predict(X)`` contract. Fitted models serialise with ``to_dict`` and
come back through :func:`model_from_dict`."""

from ._common import ModelError
from .forest import ForestConfig, ForestModel, Tree, best_split, fit_forest, fit_tree, tree_rng
from .knn import KNNConfig, KNNModel, fit_knn
from .ols import OLSConfig, OLSModel, fit_ols
from .svr import Kernel, SVRConfig, SVRModel, dual_objective, fit_svr, kernel_matrix, kkt_violations

_FITTERS = {
    OLSConfig: fit_ols,
    KNNConfig: fit_knn,
    SVRConfig: fit_svr,
    ForestConfig: fit_forest,
}
_MODELS = {m.kind: m for m in (OLSModel, KNNModel, SVRModel, ForestModel)}


def fit_model(config, X, y):
    try:
        fitter = _FITTERS[type(config)]
    except KeyError:
        raise ModelError(f"unknown model config {config!r}") from None
    return fitter(X, y, config)


def model_from_dict(d: dict):
    return _MODELS[d["kind"]].from_dict(d)


__all__ = [
    "ForestConfig", "ForestModel", "KNNConfig", "KNNModel", "Kernel", "ModelError", "OLSConfig",
    "OLSModel", "SVRConfig", "SVRModel", "Tree", "best_split", "dual_objective", "fit_forest",
    "fit_knn", "fit_model", "fit_ols", "fit_svr", "fit_tree", "kernel_matrix", "kkt_violations",
    "model_from_dict", "tree_rng",
]
