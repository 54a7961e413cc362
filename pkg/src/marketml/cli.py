"""Command-line entry point: ``marketml {stats,corr,features,run,sweep,fit-line}``.

Data goes to stdout (or ``--output``); warnings and errors go to stderr.
Exit codes: 0 success, 1 invalid configuration, 2 unreadable input data,
3 empty date intersection.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import evaluation, features, stats
from .market_data import Corpus, DataError, EmptyJoinError, align_by_date, daily_pair, embedded_corpus, load_csv, weekly_pair
from .models import ForestConfig, Kernel, KNNConfig, ModelError, OLSConfig, SVRConfig

OUTPUT_DIR_ENV = "MARKETML_OUTPUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NO_OVERLAP = 0, 1, 2, 3

SERIES_CORPORA = {"usa-daily": Corpus.USA_DAILY, "aus-daily": Corpus.AUS_DAILY,
                  "usa-weekly": Corpus.USA_WEEKLY, "aus-weekly": Corpus.AUS_WEEKLY}
PAIR_CORPORA = {"daily": daily_pair, "weekly": weekly_pair}
MODEL_KEYS = ("knn", "svr-poly", "svr-linear", "forest", "ols")
DEFAULT_MODEL_KEYS = ("knn", "svr-poly", "svr-linear", "forest")


class ConfigError(Exception):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


def _source_args(p: argparse.ArgumentParser, pair: bool, default_corpus: str | None = None):
    g = p.add_mutually_exclusive_group()
    choices = sorted(PAIR_CORPORA if pair else SERIES_CORPORA)
    g.add_argument("--corpus", choices=choices, default=None,
                   help=f"bundled dataset (default: {default_corpus})" if default_corpus else "bundled dataset")
    if pair:
        g.add_argument("--csv", nargs=2, metavar=("CSV_A", "CSV_B"),
                       help="two OHLC files; A supplies the predictors (USA), B the target (AUS)")
    else:
        g.add_argument("--csv", metavar="CSV", help="OHLC file")
    p.add_argument("--date-format", default="auto", help="strptime pattern for --csv dates (default: auto)")
    p.set_defaults(default_corpus=default_corpus)


def _output_args(p: argparse.ArgumentParser, default_format: str):
    p.add_argument("--format", choices=("text", "csv", "json"), default=default_format)
    p.add_argument("--output", "-o", help="write here instead of stdout")


def _split_args(p: argparse.ArgumentParser):
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--split", choices=("shuffled", "chronological"), default="shuffled")
    p.add_argument("--seed", type=int, default=42, help="split seed (shuffled mode)")


def _model_args(p: argparse.ArgumentParser):
    p.add_argument("--models", default=",".join(DEFAULT_MODEL_KEYS),
                   help=f"comma-separated subset of {','.join(MODEL_KEYS)}")
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--svr-c", type=float, default=1.0)
    p.add_argument("--svr-epsilon", type=float, default=0.1)
    p.add_argument("--svr-gamma", default="scale", help="'scale' or a positive number")
    p.add_argument("--svr-degree", type=int, default=3)
    p.add_argument("--svr-coef0", type=float, default=0.0)
    p.add_argument("--svr-tol", type=float, default=1e-3)
    p.add_argument("--svr-max-passes", type=int, default=1000)
    p.add_argument("--forest-trees", type=int, default=100)
    p.add_argument("--forest-seed", type=int, default=0)
    p.add_argument("--forest-max-features", default="all", help="'all', 'sqrt' or a fraction")
    p.add_argument("--forest-min-leaf", type=int, default=1)
    p.add_argument("--forest-max-depth", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1, help="threads for forest fitting")


class _Parser(argparse.ArgumentParser):
    # argparse's own status 2 would read as a data error
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="marketml", description="Cross-market index statistics and regression.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="descriptive statistics of closing prices")
    _source_args(p, pair=False)
    _output_args(p, "text")

    p = sub.add_parser("corr", help="Pearson correlation of the eight OHLC columns")
    _source_args(p, pair=True, default_corpus="daily")
    _output_args(p, "csv")

    p = sub.add_parser("features", help="lag/rolling feature matrix as CSV")
    _source_args(p, pair=True, default_corpus="daily")
    _output_args(p, "csv")

    p = sub.add_parser("run", help="fit and score the regressors")
    _source_args(p, pair=True, default_corpus="daily")
    _split_args(p)
    _model_args(p)
    _output_args(p, "text")
    p.add_argument("--predictions-dir", default=None,
                   help=f"directory for per-model prediction CSVs (default: ${OUTPUT_DIR_ENV} or .)")
    p.add_argument("--no-predictions", action="store_true", help="do not write prediction CSVs")

    p = sub.add_parser("sweep", help="repeat 'run' over several split seeds")
    _source_args(p, pair=True, default_corpus="daily")
    _split_args(p)
    _model_args(p)
    _output_args(p, "text")
    p.add_argument("--seeds", default="1-10", help="e.g. '1-10' or '3,7,11'")

    p = sub.add_parser("fit-line", help="least-squares line of B on A with a confidence band")
    _source_args(p, pair=True, default_corpus="weekly")
    _output_args(p, "csv")
    p.add_argument("--confidence", type=float, default=0.95)
    return parser


# -- loading ---------------------------------------------------------------

def load_series(args):
    if args.csv:
        return load_csv(args.csv, args.date_format)
    if args.corpus is None:
        raise ConfigError(["give one data source: --corpus or --csv"])
    return embedded_corpus(SERIES_CORPORA[args.corpus])


def load_pair(args):
    if args.csv:
        a, b = (load_csv(p, args.date_format) for p in args.csv)
        return align_by_date(a, b), "csv:" + ",".join(args.csv)
    name = args.corpus or args.default_corpus
    return PAIR_CORPORA[name](), name


def parse_seeds(text: str) -> list[int]:
    seeds = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"(-?\d+)-(-?\d+)", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            seeds.extend(range(lo, hi + 1))
        elif part:
            seeds.append(int(part))
    return seeds


def build_run_config(args):
    """Validate split and model options; every problem is collected."""
    problems = []
    spec = None
    try:
        spec = features.SplitSpec(args.test_fraction, args.split, args.seed)
    except features.FeatureError as exc:
        problems.append(f"--test-fraction: {exc}")

    keys = [k.strip() for k in args.models.split(",") if k.strip()]
    unknown = [k for k in keys if k not in MODEL_KEYS]
    if unknown:
        problems.append(f"--models: unknown model(s) {', '.join(unknown)}; choose from {', '.join(MODEL_KEYS)}")
    if args.jobs < 1:
        problems.append(f"--jobs must be >= 1, got {args.jobs}")

    gamma = args.svr_gamma
    if gamma != "scale":
        try:
            gamma = float(gamma)
        except ValueError:
            problems.append(f"--svr-gamma must be 'scale' or a number, got {gamma!r}")
            gamma = "scale"
    max_features = args.forest_max_features
    if max_features not in ("all", "sqrt"):
        try:
            max_features = float(max_features)
        except ValueError:
            problems.append(f"--forest-max-features must be 'all', 'sqrt' or a fraction, got {max_features!r}")
            max_features = "all"

    def make(factory, **kw):
        try:
            return factory(**kw)
        except ModelError as exc:
            problems.append(str(exc))

    svr_common = dict(c=args.svr_c, epsilon=args.svr_epsilon, gamma=gamma, degree=args.svr_degree,
                      coef0=args.svr_coef0, tol=args.svr_tol, max_passes=args.svr_max_passes)
    builders = {
        "knn": ("kNN", lambda: make(KNNConfig, k=args.knn_k)),
        "svr-poly": ("SVR", lambda: make(SVRConfig, kernel=Kernel.POLY, **svr_common)),
        "svr-linear": ("Linear SVR", lambda: make(SVRConfig, kernel=Kernel.LINEAR, **svr_common)),
        "forest": ("Random Forest", lambda: make(ForestConfig, n_trees=args.forest_trees, seed=args.forest_seed,
                                                  max_features=max_features, min_leaf=args.forest_min_leaf,
                                                  max_depth=args.forest_max_depth, n_jobs=max(args.jobs, 1))),
        "ols": ("Linear Regression", lambda: make(OLSConfig)),
    }
    models = []
    for k in keys:
        if k in builders:
            name, build = builders[k]
            models.append((name, build()))
    if problems:
        raise ConfigError(problems)
    return spec, models


# -- output ----------------------------------------------------------------

def _csv_text(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _num(v) -> str:
    return str(v) if isinstance(v, int) else repr(float(v))


def _emit(args, text: str):
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_stats(args) -> str:
    series = load_series(args)
    s = stats.summarize(series.closes())
    rows = s.rows()
    if args.format == "json":
        return json.dumps({"market": series.market_id, **{k: v for k, v in rows}}, indent=2) + "\n"
    if args.format == "csv":
        return _csv_text([("statistic", series.market_id)] + [(k, _num(v)) for k, v in rows])
    width = max(len("Statistic"), *(len(k) for k, _ in rows))
    lines = [f"{'Statistic'.ljust(width)}  {series.market_id}"]
    for k, v in rows:
        lines.append(f"{k.ljust(width)}  {v:d}" if isinstance(v, int) else f"{k.ljust(width)}  {v:.2f}")
    return "\n".join(lines) + "\n"


def cmd_corr(args) -> str:
    pair, _ = load_pair(args)
    cm = stats.correlation_matrix(pair.named_columns())
    if args.format == "json":
        return json.dumps({"labels": list(cm.labels), "r": cm.r.tolist()}, indent=2) + "\n"
    if args.format == "csv":
        return _csv_text([("row", "col", "r")] + [(a, b, _num(r)) for a, b, r in cm.long_form()])
    width = max(len(label) for label in cm.labels)
    lines = [" " * width + "".join(f"{label:>11}" for label in cm.labels)]
    for label, row in zip(cm.labels, cm.r):
        lines.append(label.ljust(width) + "".join(f"{v:11.4f}" for v in row))
    return "\n".join(lines) + "\n"


def cmd_features(args) -> str:
    pair, _ = load_pair(args)
    fm = features.assemble(pair)
    if args.format == "json":
        return json.dumps({"columns": list(fm.column_names) + ["target"],
                           "dates": [d.isoformat() for d in fm.row_dates],
                           "rows": np.column_stack([fm.rows, fm.target]).tolist()}, indent=2) + "\n"
    rows = [("date",) + fm.column_names + ("target",)]
    for d, x, y in zip(fm.row_dates, fm.rows, fm.target):
        rows.append((d.isoformat(), *map(_num, x), _num(y)))
    return _csv_text(rows)


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def _provenance(args, corpus: str) -> str:
    return (f"# corpus={corpus} split={args.split} seed={args.seed} test_fraction={args.test_fraction} "
            f"models={args.models}\n")


def cmd_run(args) -> str:
    spec, models = build_run_config(args)
    pair, corpus = load_pair(args)
    result = evaluation.run_experiment(pair, spec, models, corpus)

    if not args.no_predictions:
        out_dir = Path(args.predictions_dir or os.environ.get(OUTPUT_DIR_ENV) or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        for m in result.models:
            if m.metrics is None:
                continue
            rows = [("date", "actual", "predicted")] + [(d, _num(a), _num(p)) for d, a, p in m.predictions]
            (out_dir / f"predictions_{_slug(m.name)}.csv").write_text(_csv_text(rows))

    if args.format == "json":
        return result.to_json()
    if args.format == "csv":
        rows = [("model",) + evaluation.METRIC_NAMES + ("n_test", "error")]
        for m in result.models:
            if m.metrics is None:
                rows.append((m.name,) + ("",) * (len(evaluation.METRIC_NAMES) + 1) + (m.error,))
            else:
                vals = ["" if getattr(m.metrics, k) is None else _num(getattr(m.metrics, k))
                        for k in evaluation.METRIC_NAMES]
                rows.append((m.name, *vals, m.metrics.n_test, ""))
        return _csv_text(rows)
    return (_provenance(args, corpus)
            + f"# rows={result.n_rows} train={result.n_train} test={result.n_test}\n"
            + result.table())


def cmd_sweep(args) -> str:
    spec, models = build_run_config(args)
    try:
        seeds = parse_seeds(args.seeds)
    except ValueError:
        raise ConfigError([f"--seeds: cannot parse {args.seeds!r}"]) from None
    if not seeds:
        raise ConfigError(["--seeds: need at least one seed"])
    pair, corpus = load_pair(args)
    summary = evaluation.seed_sweep(pair, spec, models, seeds, corpus)
    if args.format == "json":
        return json.dumps({"corpus": corpus, **summary.as_dict()}, indent=2) + "\n"
    rows = [("model", "metric", "median", "min", "max")]
    for name, per_metric in summary.stats.items():
        for metric, agg in per_metric.items():
            rows.append((name, metric, agg["median"], agg["min"], agg["max"]))
    if args.format == "csv":
        return _csv_text([rows[0]] + [(r[0], r[1], *map(_num, r[2:])) for r in rows[1:]])
    lines = [f"# corpus={corpus} seeds={','.join(map(str, seeds))} split=shuffled "
             f"test_fraction={args.test_fraction} models={args.models}"]
    lines.append(f"{'Model':<18}{'Metric':<14}{'Median':>14}{'Min':>14}{'Max':>14}")
    for name, metric, med, lo, hi in rows[1:]:
        lines.append(f"{name:<18}{metric:<14}{med:>14.6g}{lo:>14.6g}{hi:>14.6g}")
    return "\n".join(lines) + "\n"


def cmd_fit_line(args) -> str:
    if not 0.0 < args.confidence < 1.0:
        raise ConfigError([f"--confidence must lie strictly between 0 and 1, got {args.confidence}"])
    pair, _ = load_pair(args)
    x, y = pair.series_a, pair.series_b
    fit = stats.fit_line_with_ci(x, y, args.confidence)
    xs = np.sort(x)
    yhat, lower, upper = fit.band(xs)
    if args.format == "json":
        return json.dumps({"slope": fit.slope, "intercept": fit.intercept, "r": fit.r,
                           "residual_std": fit.residual_std, "confidence": fit.confidence,
                           "t_quantile": fit.t_quantile,
                           "band": [{"x": a, "fit": b, "lower": c, "upper": d}
                                    for a, b, c, d in zip(xs.tolist(), yhat.tolist(), lower.tolist(), upper.tolist())]},
                          indent=2) + "\n"
    rows = [("x", "fit", "lower", "upper")] + [tuple(map(_num, r)) for r in zip(xs, yhat, lower, upper)]
    text = _csv_text(rows)
    if args.format == "text":
        text = (f"# slope={fit.slope:.6g} intercept={fit.intercept:.6g} r={fit.r:.4f} "
                f"confidence={fit.confidence}\n") + text
    return text


COMMANDS = {"stats": cmd_stats, "corr": cmd_corr, "features": cmd_features, "run": cmd_run,
            "sweep": cmd_sweep, "fit-line": cmd_fit_line}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        _emit(args, COMMANDS[args.command](args))
    except ConfigError as exc:
        for p in exc.problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    except EmptyJoinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_OVERLAP
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (features.FeatureError, stats.StatsError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
