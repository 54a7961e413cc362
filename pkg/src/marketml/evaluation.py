"""Regression metrics and the lag-feature experiment driver."""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .features import SplitSpec, assemble, split, standardize_fit
from .market_data import AlignedPair
from .models import ForestConfig, Kernel, KNNConfig, OLSConfig, SVRConfig, fit_model

log = logging.getLogger(__name__)

METRIC_NAMES = ("mse", "rmse", "mae", "r2", "mape", "rel_err_mean", "rel_err_std")
TABLE_COLUMNS = (("MSE", "mse"), ("MAE", "mae"), ("R²", "r2"),
                 ("Rel. Error Mean", "rel_err_mean"), ("Rel. Error Std", "rel_err_std"))


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class MetricsReport:
    mse: float
    rmse: float
    mae: float
    r2: float | None
    mape: float | None
    rel_err_mean: float | None
    rel_err_std: float | None
    n_test: int
    warnings: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["warnings"] = list(self.warnings)
        return d


def compute_metrics(actual, predicted) -> MetricsReport:
    """MSE, RMSE, MAE, R², MAPE and relative-error mean/std.

    Relative error is |z - ẑ| / |z|; MAPE is 100 times its mean and the std
    uses the n-1 denominator. R² is None for a constant ``actual`` and the
    relative-error metrics are None when any actual value is zero.
    """
    z = np.asarray(actual, dtype=float).ravel()
    zh = np.asarray(predicted, dtype=float).ravel()
    if z.size != zh.size:
        raise MetricsError(f"length mismatch: {z.size} actual vs {zh.size} predicted")
    if z.size < 2:
        raise MetricsError("need at least two observations")
    err = z - zh
    sse = float(err @ err)
    mse = sse / z.size
    warns = []

    dev = z - z.mean()
    sst = float(dev @ dev)
    if sst == 0.0:
        r2 = None
        warns.append("R² undefined: actual values are constant")
    else:
        r2 = 1.0 - sse / sst

    if np.any(z == 0.0):
        mape = rel_mean = rel_std = None
        warns.append("relative error undefined: actual contains zero")
    else:
        rel = np.abs(err) / np.abs(z)
        rel_mean = float(rel.mean())
        rel_std = float(rel.std(ddof=1))
        mape = 100.0 * rel_mean

    for w in warns:
        log.warning(w)
    return MetricsReport(mse, math.sqrt(mse), float(np.mean(np.abs(err))), r2, mape, rel_mean, rel_std,
                         int(z.size), tuple(warns))


def default_models() -> list[tuple[str, object]]:
    """The four-model line-up: kNN (k=5), cubic-kernel SVR, linear SVR and a
    100-tree random forest."""
    return [
        ("kNN", KNNConfig(k=5)),
        ("SVR", SVRConfig(kernel=Kernel.POLY, degree=3)),
        ("Linear SVR", SVRConfig(kernel=Kernel.LINEAR)),
        ("Random Forest", ForestConfig(n_trees=100)),
    ]


def config_echo(config) -> dict:
    d = dataclasses.asdict(config)
    d.pop("n_jobs", None)  # scheduling only; must not change the output
    for k, v in d.items():
        if hasattr(v, "value"):
            d[k] = v.value
    return {"kind": config.kind, **d}


@dataclass
class ModelOutcome:
    name: str
    config: dict
    metrics: MetricsReport | None = None
    predictions: list[tuple[str, float, float]] = field(default_factory=list)
    error: str | None = None
    converged: bool | None = None

    def as_dict(self) -> dict:
        d = {"name": self.name, "config": self.config}
        if self.error is not None:
            d["error"] = self.error
        else:
            d["metrics"] = self.metrics.as_dict()
            if self.converged is not None:
                d["converged"] = self.converged
            d["predictions"] = [{"date": dt, "actual": a, "predicted": p} for dt, a, p in self.predictions]
        return d


@dataclass
class ExperimentResult:
    corpus: str
    split: SplitSpec
    n_rows: int
    n_train: int
    n_test: int
    feature_names: tuple[str, ...]
    models: list[ModelOutcome]

    def as_dict(self) -> dict:
        return {
            "corpus": self.corpus,
            "split": {"test_fraction": self.split.test_fraction, "mode": self.split.mode.value,
                      "seed": self.split.seed},
            "n_rows": self.n_rows,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "features": list(self.feature_names),
            "models": [m.as_dict() for m in self.models],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, allow_nan=False) + "\n"

    def metrics(self) -> dict[str, MetricsReport]:
        return {m.name: m.metrics for m in self.models if m.metrics is not None}

    def table(self) -> str:
        return render_table(self.models)


def _fmt(v, digits):
    return "n/a" if v is None else f"{v:.{digits}f}"


def render_table(models: Sequence[ModelOutcome]) -> str:
    """Aligned text table: Model, MSE, MAE, R², Rel. Error Mean, Rel. Error Std."""
    header = ["Model"] + [h for h, _ in TABLE_COLUMNS]
    digits = {"mse": 2, "mae": 2, "r2": 3, "rel_err_mean": 6, "rel_err_std": 6}
    body = [[m.name] + ([] if m.metrics is None else
                        [_fmt(getattr(m.metrics, a), digits[a]) for _, a in TABLE_COLUMNS]) for m in models]
    widths = [max(len(r[i]) for r in [header] + body if i < len(r)) for i in range(len(header))]
    lines = []
    for r, m in zip([header] + body, [None] + list(models)):
        if m is not None and m.metrics is None:
            # failure text runs past the metric columns instead of widening them
            lines.append(f"{r[0].ljust(widths[0])}  failed: {m.error}")
            continue
        lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))))
    return "\n".join(lines) + "\n"


def run_experiment(pair: AlignedPair, spec: SplitSpec = SplitSpec(), models=None,
                   corpus: str = "custom") -> ExperimentResult:
    """Assemble lag features, split, standardize on the training rows, then
    fit and score each model on the shared test rows.

    A model that raises is recorded with its error; the others still run.
    """
    models = default_models() if models is None else list(models)
    fm = assemble(pair)
    train, test = split(fm, spec)
    scaler = standardize_fit(train)
    train, test = scaler.transform(train), scaler.transform(test)
    dates = [d.isoformat() for d in test.row_dates]

    outcomes = []
    for name, config in models:
        out = ModelOutcome(name, config_echo(config))
        try:
            model = fit_model(config, train.rows, train.target)
            pred = model.predict(test.rows)
            out.metrics = compute_metrics(test.target, pred)
            out.predictions = [(d, float(a), float(p)) for d, a, p in zip(dates, test.target, pred)]
            out.converged = getattr(model, "converged", None)
        except Exception as exc:  # isolate per-model failures
            log.warning("model %s failed: %s", name, exc)
            out.error = f"{type(exc).__name__}: {exc}"
        outcomes.append(out)
    return ExperimentResult(corpus, spec, len(fm), len(train), len(test), fm.column_names, outcomes)


@dataclass(frozen=True)
class SweepSummary:
    seeds: tuple[int, ...]
    # model name -> metric name -> {"median", "min", "max"}
    stats: dict[str, dict[str, dict[str, float]]]
    runs: tuple[ExperimentResult, ...] = field(repr=False)

    def median(self, model: str, metric: str) -> float:
        return self.stats[model][metric]["median"]

    def as_dict(self) -> dict:
        return {"seeds": list(self.seeds), "summary": self.stats}


def seed_sweep(pair: AlignedPair, base: SplitSpec, models, seeds: Sequence[int],
               corpus: str = "custom") -> SweepSummary:
    """Repeat :func:`run_experiment` over shuffled splits with each seed and
    summarise every metric by median, min and max."""
    if not seeds:
        raise ValueError("seed_sweep needs at least one seed")
    models = default_models() if models is None else list(models)
    runs = []
    for s in seeds:
        spec = dataclasses.replace(base, seed=int(s), mode="shuffled")
        runs.append(run_experiment(pair, spec, models, corpus))

    stats: dict[str, dict[str, dict[str, float]]] = {}
    for name, _ in models:
        per_metric = {}
        for metric in METRIC_NAMES:
            vals = [getattr(r.metrics()[name], metric) for r in runs if name in r.metrics()]
            vals = [v for v in vals if v is not None]
            if vals:
                per_metric[metric] = {"median": float(np.median(vals)), "min": float(np.min(vals)),
                                      "max": float(np.max(vals))}
        stats[name] = per_metric
    return SweepSummary(tuple(int(s) for s in seeds), stats, tuple(runs))
