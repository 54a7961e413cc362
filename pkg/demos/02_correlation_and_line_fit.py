"""
How closely do the two indices move together?
=============================================

Join the daily series by calendar date, compute the Pearson matrix of all
eight OHLC columns, then fit a line to the weekly closes with a 95% band
around the mean response.
"""

import numpy as np

from marketml.market_data import daily_pair, weekly_pair
from marketml.stats import correlation_matrix, fit_line_with_ci

pair = daily_pair()
cm = correlation_matrix(pair.named_columns())
print(f"{len(pair)} common trading days")
print(" " * 10 + "".join(f"{label:>10}" for label in cm.labels))
for label, row in zip(cm.labels, cm.r):
    print(f"{label:10}" + "".join(f"{v:10.3f}" for v in row))

###############################################################################
# Weekly closes: AUS on USA. The band is narrowest at the mean USA close.

weekly = weekly_pair()
fit = fit_line_with_ci(weekly.series_a, weekly.series_b)
print(f"\nAUS = {fit.slope:.4f} * USA + {fit.intercept:.1f}   (r = {fit.r:.3f})")
grid = np.linspace(weekly.series_a.min(), weekly.series_a.max(), 5)
yhat, lo, hi = fit.band(grid)
for x, a, b, c in zip(grid, lo, yhat, hi):
    print(f"  USA {x:8.1f}: {a:8.1f} <= {b:8.1f} <= {c:8.1f}")
