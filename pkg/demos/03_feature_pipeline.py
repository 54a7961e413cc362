"""
From two price series to a design matrix
========================================

The target is the AUS close. Predictors are the same-day USA close, its
first three lags and a three-day rolling mean and standard deviation.
"""

from marketml.features import SplitSpec, assemble, split, standardize_fit
from marketml.market_data import daily_pair

pair = daily_pair()
fm = assemble(pair)
print(f"{len(pair)} aligned days -> {len(fm)} complete rows (the first three have no lag 3)")
print("columns:", ", ".join(fm.column_names))
print("first row:", fm.row_dates[0], fm.rows[0].round(2), "target", fm.target[0])

###############################################################################
# A shuffled 80/20 split with seed 42, then scaling fitted on the training
# rows only. Test columns are therefore not exactly zero-mean.

train, test = split(fm, SplitSpec(test_fraction=0.2, seed=42))
scaler = standardize_fit(train)
print(f"\ntrain {len(train)}, test {len(test)}")
print("train means after scaling:", scaler.transform(train).rows.mean(axis=0).round(12))
print("test means after scaling: ", scaler.transform(test).rows.mean(axis=0).round(3))
