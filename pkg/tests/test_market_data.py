import datetime as dt
import io
import json
import logging
from decimal import Decimal
from importlib import resources

import pytest
from hypothesis import given, strategies as st

from marketml.market_data import (
    AlignedPair, Corpus, DataError, EmptyJoinError, MarketSeries, OhlcBar, align_by_date, corpus_manifest,
    daily_pair, dedup_bars, embedded_corpus, load_csv, read_csv, validate_bars, weekly_pair, write_csv,
)

HEADER = "date,open,high,low,close\n"


def _write(tmp_path, body, name="s.csv"):
    p = tmp_path / name
    p.write_text(HEADER + body)
    return p


def _bar(day, close="100.0", **kw):
    prices = dict(open=Decimal(close), high=Decimal(close), low=Decimal(close), close=Decimal(close))
    prices.update({k: Decimal(v) for k, v in kw.items()})
    return OhlcBar(dt.date(2025, 1, day), **prices)


def test_load_two_digit_year_row(tmp_path):
    s = load_csv(_write(tmp_path, "24-01-25,8383.2,8455.6,8356.7,8408.9\n"))
    assert len(s) == 1
    assert s.bars[0].date == dt.date(2025, 1, 24)
    assert s.bars[0].close == Decimal("8408.9")


@pytest.mark.parametrize("text", ["20-Jan-2025", "2025-01-20", "20-01-25"])
def test_date_styles(tmp_path, text):
    s = load_csv(_write(tmp_path, f"{text},1,2,0.5,1.5\n"))
    assert s.dates == [dt.date(2025, 1, 20)]


def test_explicit_date_format(tmp_path):
    s = load_csv(_write(tmp_path, "01/20/2025,1,2,0.5,1.5\n"), date_format="%m/%d/%Y")
    assert s.dates == [dt.date(2025, 1, 20)]


def test_header_case_and_order(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("Close,Date,LOW,High,Open\n1.5,2025-01-02,0.5,2,1\n")
    bar = load_csv(p).bars[0]
    assert (bar.open, bar.high, bar.low, bar.close) == (1, 2, Decimal("0.5"), Decimal("1.5"))


def test_duplicate_date_keeps_first(tmp_path):
    s = load_csv(_write(tmp_path, "2025-01-02,1,2,0.5,1.5\n2025-01-02,9,9,9,9\n"))
    assert len(s) == 1
    assert s.bars[0].close == Decimal("1.5")


def test_rows_sorted_ascending(tmp_path):
    s = load_csv(_write(tmp_path, "2025-01-03,1,1,1,1\n2025-01-02,2,2,2,2\n"))
    assert s.dates == [dt.date(2025, 1, 2), dt.date(2025, 1, 3)]


def test_high_below_low_warns_once(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        s = load_csv(_write(tmp_path, "2025-01-02,10,9,11,10\n"))
    assert len(s) == 1
    assert len(validate_bars(s)) == 1
    assert len([r for r in caplog.records if r.levelno == logging.WARNING]) == 1


def test_missing_file_names_path(tmp_path):
    with pytest.raises(DataError, match="nope.csv"):
        load_csv(tmp_path / "nope.csv")


def test_bad_number_reports_row(tmp_path):
    with pytest.raises(DataError, match="row 2"):
        load_csv(_write(tmp_path, "2025-01-02,1,1,1,1\n2025-01-03,1,x,1,1\n"))


def test_bad_date_reports_row(tmp_path):
    with pytest.raises(DataError, match="row 1"):
        load_csv(_write(tmp_path, "someday,1,1,1,1\n"))


def test_empty_file(tmp_path):
    with pytest.raises(DataError):
        load_csv(_write(tmp_path, ""))


def test_missing_column(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("date,open,high,close\n2025-01-02,1,1,1\n")
    with pytest.raises(DataError, match="low"):
        load_csv(p)


def test_validate_clean_series():
    s = MarketSeries("X", (_bar(2, open="99", high="101", low="98"),))
    assert validate_bars(s) == []


def test_validate_open_above_high():
    s = MarketSeries("X", (_bar(2, open="102", high="101", low="98"),))
    (w,) = validate_bars(s)
    assert w.rule == "open>high"


def test_validate_zero_close():
    s = MarketSeries("X", (_bar(2, close="0", open="10", high="11", low="9"),))
    (w,) = validate_bars(s)
    assert w.rule == "non-positive price"


def test_series_rejects_unsorted():
    with pytest.raises(DataError):
        MarketSeries("X", (_bar(3), _bar(2)))


def _series(days, name="X"):
    return MarketSeries(name, tuple(_bar(d, close=str(100 + d)) for d in days))


def test_align_intersection():
    pair = align_by_date(_series([1, 2, 3], "A"), _series([2, 3, 4], "B"))
    assert pair.dates == (dt.date(2025, 1, 2), dt.date(2025, 1, 3))
    assert list(pair.series_a) == [102.0, 103.0]


def test_align_identity():
    s = _series([1, 2, 3, 5])
    assert len(align_by_date(s, s)) == len(s)


def test_align_empty_intersection():
    with pytest.raises(EmptyJoinError):
        align_by_date(_series([1, 2]), _series([3, 4]))


day_sets = st.sets(st.integers(1, 28), min_size=1, max_size=20)


@given(day_sets, day_sets)
def test_align_symmetric_dates(da, db):
    a, b = _series(sorted(da), "A"), _series(sorted(db), "B")
    if not da & db:
        with pytest.raises(EmptyJoinError):
            align_by_date(a, b)
        return
    assert align_by_date(a, b).dates == align_by_date(b, a).dates


@given(st.lists(st.tuples(st.integers(1, 28), st.integers(1, 999)), min_size=1, max_size=30))
def test_dedup_idempotent(rows):
    bars = [_bar(d, close=str(c)) for d, c in rows]
    once = dedup_bars(bars)
    assert dedup_bars(once) == once
    assert [b.date for b in once] == sorted({b.date for b in bars})


price = st.decimals(min_value=Decimal("0.01"), max_value=Decimal("99999.99"), places=2)


@given(st.lists(st.tuples(st.integers(1, 28), price, price, price, price), min_size=1, max_size=15,
                unique_by=lambda r: r[0]))
def test_csv_round_trip(rows):
    bars = tuple(sorted((OhlcBar(dt.date(2025, 2, d), o, h, lo, c) for d, o, h, lo, c in rows),
                        key=lambda b: b.date))
    s = MarketSeries("X", bars)
    buf = io.StringIO()
    write_csv(s, buf)
    back = read_csv(io.StringIO(buf.getvalue()), "X")
    assert back == s
    out = io.StringIO()
    write_csv(back, out)
    assert out.getvalue() == buf.getvalue()


def test_corpus_weekly():
    aus = embedded_corpus(Corpus.AUS_WEEKLY)
    usa = embedded_corpus(Corpus.USA_WEEKLY)
    assert len(aus) == 27 and len(usa) == 27
    assert aus.bars[0].close == Decimal("8408.9")
    assert aus.bars[-1].close == Decimal("8666.9")
    assert usa.bars[0].close == Decimal("6101.24")


def test_corpus_daily_counts():
    # 134 listed AUS rows repeat four dates; 129 USA trading days
    assert len(embedded_corpus("aus_daily")) == 130
    assert len(embedded_corpus("usa_daily")) == 129


def test_corpus_dedup_of_repeated_block():
    raw = resources.files("marketml.data").joinpath("aus_daily.csv").read_text().splitlines()[1:]
    dates = [r.split(",")[0] for r in raw]
    assert len(dates) - len(set(dates)) == 4
    # repeats are value-identical, so first-wins loses nothing
    by_date = {}
    for r in raw:
        by_date.setdefault(r.split(",")[0], set()).add(r)
    assert all(len(v) == 1 for v in by_date.values())


def test_daily_join():
    pair = daily_pair()
    assert len(pair) == 125
    assert pair.label_a == "USA" and pair.label_b == "AUS"
    assert all(d1 < d2 for d1, d2 in zip(pair.dates, pair.dates[1:]))


def test_weekly_pair_row_aligned():
    pair = weekly_pair()
    assert isinstance(pair, AlignedPair)
    assert len(pair) == 27
    assert pair.series_a[0] == 6101.24 and pair.series_b[0] == 8408.9


def test_shipped_manifest_is_current():
    shipped = json.loads(resources.files("marketml.data").joinpath("manifest.json").read_text())
    assert shipped == json.loads(json.dumps(corpus_manifest()))
