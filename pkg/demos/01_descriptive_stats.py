"""
Summary statistics of the bundled closing prices
================================================

Load the two daily series that ship with the package and print the usual
twelve-row summary for each.
"""

from marketml.market_data import Corpus, embedded_corpus
from marketml.stats import SUMMARY_ROWS, summarize

# the AUS table repeats one week of rows; the loader keeps the first copy
usa = embedded_corpus(Corpus.USA_DAILY)
aus = embedded_corpus(Corpus.AUS_DAILY)
print(f"USA {usa.dates[0]} .. {usa.dates[-1]}: {len(usa)} rows")
print(f"AUS {aus.dates[0]} .. {aus.dates[-1]}: {len(aus)} rows")

summaries = {s.market_id: dict(summarize(s.closes()).rows()) for s in (usa, aus)}
print(f"\n{'':10}{'USA':>12}{'AUS':>12}")
for row, _ in SUMMARY_ROWS:
    print(f"{row:10}" + "".join(f"{summaries[m][row]:12.2f}" for m in ("USA", "AUS")))

###############################################################################
# Both markets are left-skewed over the period, the April sell-off being the
# long left tail.
