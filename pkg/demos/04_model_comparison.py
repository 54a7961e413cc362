"""
Four regressors on one split
============================

kNN, cubic-kernel SVR, linear SVR and a random forest, all fitted on the
same training rows and scored on the same 24 test days.
"""

from marketml.evaluation import default_models, run_experiment
from marketml.features import SplitSpec
from marketml.market_data import daily_pair
from marketml.models import OLSConfig

result = run_experiment(daily_pair(), SplitSpec(seed=42), corpus="daily")
print(result.table())

###############################################################################
# Plain least squares fails on this design: the rolling mean is an exact
# linear combination of the close and its first two lags. The failure is
# recorded against that model alone.

models = default_models()[:1] + [("Linear Regression", OLSConfig())]
print(run_experiment(daily_pair(), SplitSpec(seed=42), models).table())

###############################################################################
# A few forest predictions next to the actual AUS closes.

forest = result.models[-1]
for date, actual, predicted in forest.predictions[:5]:
    print(f"{date}  actual {actual:8.1f}  predicted {predicted:8.1f}")
