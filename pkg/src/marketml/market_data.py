"""OHLC series loading, validation, de-duplication and date alignment.

Prices are kept as :class:`decimal.Decimal` so that summary statistics and
CSV round-trips are not perturbed by binary representation; call
:meth:`MarketSeries.closes` (or the other column accessors) to get float
arrays for modelling.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import logging
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

COLUMNS = ("date", "open", "high", "low", "close")
PRICE_FIELDS = ("open", "high", "low", "close")

# tried in order when date_format="auto"; two-digit years map to 20YY
_AUTO_DATE_FORMATS = ("%Y-%m-%d", "%d-%m-%y", "%d-%b-%Y", "%d-%m-%Y")


class DataError(ValueError):
    """Raised for unreadable, malformed or empty market data."""


class EmptyJoinError(DataError):
    """Two series share no calendar date."""


@dataclass(frozen=True)
class OhlcBar:
    date: dt.date
    open: Decimal
    high: Decimal
    low: Decimal
    close: Decimal


@dataclass(frozen=True)
class MarketSeries:
    market_id: str
    bars: tuple[OhlcBar, ...]

    def __post_init__(self):
        if not self.bars:
            raise DataError(f"{self.market_id}: series is empty")
        dates = [b.date for b in self.bars]
        if any(d1 >= d2 for d1, d2 in zip(dates, dates[1:])):
            raise DataError(f"{self.market_id}: dates must be strictly increasing")

    def __len__(self):
        return len(self.bars)

    @property
    def dates(self) -> list[dt.date]:
        return [b.date for b in self.bars]

    def column(self, name: str) -> np.ndarray:
        if name not in PRICE_FIELDS:
            raise KeyError(name)
        return np.array([float(getattr(b, name)) for b in self.bars])

    def closes(self) -> np.ndarray:
        return self.column("close")


@dataclass(frozen=True)
class ValidationWarning:
    date: dt.date
    rule: str

    def __str__(self):
        return f"{self.date.isoformat()}: {self.rule}"


@dataclass(frozen=True)
class AlignedPair:
    """Two markets inner-joined on calendar date.

    ``columns_a``/``columns_b`` map each OHLC field name to a float array.
    By convention market A is the USA series and market B the AUS series.
    """

    dates: tuple[dt.date, ...]
    label_a: str
    label_b: str
    columns_a: dict[str, np.ndarray] = field(repr=False)
    columns_b: dict[str, np.ndarray] = field(repr=False)

    def __len__(self):
        return len(self.dates)

    @property
    def series_a(self) -> np.ndarray:
        return self.columns_a["close"]

    @property
    def series_b(self) -> np.ndarray:
        return self.columns_b["close"]

    def named_columns(self) -> dict[str, np.ndarray]:
        """All eight OHLC columns keyed ``"<label>_<Field>"``; identical labels get
        ``.A``/``.B`` suffixes."""
        out = {}
        labels = (self.label_a, self.label_b)
        if labels[0] == labels[1]:  # same market twice, keep all eight columns apart
            labels = (f"{labels[0]}.A", f"{labels[1]}.B")
        for label, cols in zip(labels, (self.columns_a, self.columns_b)):
            for name in PRICE_FIELDS:
                out[f"{label}_{name.capitalize()}"] = cols[name]
        return out


def parse_date(text: str, date_format: str = "auto") -> dt.date:
    text = text.strip()
    if date_format != "auto":
        return dt.datetime.strptime(text, date_format).date()
    for fmt in _AUTO_DATE_FORMATS:
        try:
            return dt.datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    raise ValueError(f"unrecognised date {text!r}")


def _parse_price(text: str) -> Decimal:
    value = Decimal(text.strip())
    if not value.is_finite():
        raise InvalidOperation(text)
    return value


def dedup_bars(bars: Iterable[OhlcBar]) -> list[OhlcBar]:
    """Sort ascending by date, keeping the first occurrence of each date."""
    seen: dict[dt.date, OhlcBar] = {}
    for bar in bars:
        seen.setdefault(bar.date, bar)
    return [seen[d] for d in sorted(seen)]


def read_csv(handle, market_id: str, date_format: str = "auto", source: str = "<stream>") -> MarketSeries:
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{source}: file is empty") from None
    names = [h.strip().lower() for h in header]
    missing = [c for c in COLUMNS if c not in names]
    if missing:
        raise DataError(f"{source}: header lacks column(s) {', '.join(missing)}")
    idx = {c: names.index(c) for c in COLUMNS}

    bars = []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            date = parse_date(row[idx["date"]], date_format)
        except (ValueError, IndexError) as exc:
            raise DataError(f"{source}: row {row_no}: bad date ({exc})") from None
        try:
            prices = {f: _parse_price(row[idx[f]]) for f in PRICE_FIELDS}
        except (InvalidOperation, IndexError):
            raise DataError(f"{source}: row {row_no}: bad price in {row!r}") from None
        bars.append(OhlcBar(date=date, **prices))

    if not bars:
        raise DataError(f"{source}: no data rows")
    series = MarketSeries(market_id, tuple(dedup_bars(bars)))
    for w in validate_bars(series):
        log.warning("%s %s: %s", source, market_id, w)
    return series


def load_csv(path, date_format: str = "auto", market_id: str | None = None) -> MarketSeries:
    """Load an OHLC CSV file.

    The header must name ``date,open,high,low,close`` (any case, any order).
    Dates may be ISO, ``DD-MM-YY`` or ``DD-Mon-YYYY`` when ``date_format`` is
    ``"auto"``; otherwise ``date_format`` is a :func:`~datetime.datetime.strptime`
    pattern. Repeated dates keep their first row. OHLC ordering problems are
    logged as warnings, not raised.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            return read_csv(fh, market_id or path.stem, date_format, source=str(path))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc


def write_csv(series: MarketSeries, handle) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(COLUMNS)
    for b in series.bars:
        writer.writerow([b.date.isoformat(), str(b.open), str(b.high), str(b.low), str(b.close)])


def validate_bars(series: MarketSeries) -> list[ValidationWarning]:
    """One warning per offending rule and bar. A non-positive price or an
    inverted high/low range is reported on its own, without the derived
    open/close ordering complaints it would also trigger."""
    out = []
    for b in series.bars:
        if any(getattr(b, f) <= 0 for f in PRICE_FIELDS):
            out.append(ValidationWarning(b.date, "non-positive price"))
            continue
        if b.high < b.low:
            out.append(ValidationWarning(b.date, "high<low"))
            continue
        if b.open > b.high:
            out.append(ValidationWarning(b.date, "open>high"))
        if b.close > b.high:
            out.append(ValidationWarning(b.date, "close>high"))
        if b.open < b.low:
            out.append(ValidationWarning(b.date, "open<low"))
        if b.close < b.low:
            out.append(ValidationWarning(b.date, "close<low"))
    return out


def align_by_date(a: MarketSeries, b: MarketSeries) -> AlignedPair:
    """Inner join of two series on calendar date (time zones ignored)."""
    by_date_b = {bar.date: bar for bar in b.bars}
    rows = [(bar, by_date_b[bar.date]) for bar in a.bars if bar.date in by_date_b]
    if not rows:
        raise EmptyJoinError(f"no common dates between {a.market_id} and {b.market_id}")

    def cols(bars: Sequence[OhlcBar]):
        return {f: np.array([float(getattr(x, f)) for x in bars]) for f in PRICE_FIELDS}

    return AlignedPair(
        dates=tuple(r[0].date for r in rows),
        label_a=a.market_id,
        label_b=b.market_id,
        columns_a=cols([r[0] for r in rows]),
        columns_b=cols([r[1] for r in rows]),
    )


class Corpus(str, Enum):
    AUS_DAILY = "aus_daily"
    USA_DAILY = "usa_daily"
    AUS_WEEKLY = "aus_weekly"
    USA_WEEKLY = "usa_weekly"

    @property
    def market(self) -> str:
        return self.value.split("_")[0].upper()


def embedded_corpus(which: Corpus | str) -> MarketSeries:
    """Return one of the bundled S&P/ASX 200 or S&P 500 datasets."""
    which = Corpus(which)
    text = resources.files("marketml.data").joinpath(f"{which.value}.csv").read_text()
    return read_csv(io.StringIO(text), which.market, source=which.value)


def daily_pair() -> AlignedPair:
    """USA (A) and AUS (B) daily closes joined by date."""
    return align_by_date(embedded_corpus(Corpus.USA_DAILY), embedded_corpus(Corpus.AUS_DAILY))


def weekly_pair() -> AlignedPair:
    """Weekly bars paired by row position.

    The weekly tables date USA weeks by their Monday and AUS weeks by their
    Friday, so a date join is empty; rows are paired week by week instead and
    carry the AUS (week-ending) date.
    """
    usa = embedded_corpus(Corpus.USA_WEEKLY)
    aus = embedded_corpus(Corpus.AUS_WEEKLY)
    if len(usa) != len(aus):
        raise DataError("weekly tables differ in length")

    def cols(s: MarketSeries):
        return {f: s.column(f) for f in PRICE_FIELDS}

    return AlignedPair(tuple(aus.dates), usa.market_id, aus.market_id, cols(usa), cols(aus))


def corpus_manifest() -> dict:
    """Row counts and date ranges of the bundled data, plus derived sizes."""
    datasets = {}
    for c in Corpus:
        path = resources.files("marketml.data").joinpath(f"{c.value}.csv")
        raw_rows = len(path.read_text().strip().splitlines()) - 1
        s = embedded_corpus(c)
        datasets[c.value] = {
            "raw_rows": raw_rows,
            "rows": len(s),
            "first_date": s.dates[0].isoformat(),
            "last_date": s.dates[-1].isoformat(),
            "first_close": str(s.bars[0].close),
            "last_close": str(s.bars[-1].close),
        }
    pair = daily_pair()
    # local imports avoid a cycle at package import
    from .features import assemble
    from .stats import pearson

    return {
        "datasets": datasets,
        "daily_join_rows": len(pair),
        "daily_feature_rows": len(assemble(pair)),
        "daily_close_pearson_usa_aus": round(pearson(pair.series_a, pair.series_b), 12),
        "notes": [
            "aus_daily lists 2025-04-22..2025-04-28 twice; first occurrence kept (134 raw rows -> 130).",
            "usa_daily has 129 trading days, one fewer than the count of 130 quoted alongside the "
            "published summary table; the missing observation is not recoverable from the bundled data.",
            "Weekly tables are paired by row (USA weeks dated Monday, AUS weeks dated Friday).",
            "The feature matrix keeps the same-day USA close as a predictor (look-ahead relative to a "
            "forecasting setting).",
        ],
    }


def write_manifest(path) -> None:
    Path(path).write_text(json.dumps(corpus_manifest(), indent=2) + "\n")
