"""Statistical-learning toolkit for cross-market index regression on the
S&P 500 / S&P/ASX 200 daily and weekly series."""

__version__ = "0.1.0"
