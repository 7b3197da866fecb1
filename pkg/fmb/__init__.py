"""Two-pass factor premium estimation and path-cloud summaries."""

from fmb.summary import (
    MARKET_PREMIUM_COMPARATORS,
    MARKET_PREMIUM_LONGEST_SAMPLE,
    annualized_premia,
    comparator_etc,
    fama_macbeth_tstat,
    option_impact_tables,
    path_weights,
    weighted_premium_series,
)
from fmb.two_pass import MODES, ROLLING_WINDOWS, FirstPassLoadings, PremiumSeries, first_pass, second_pass

__all__ = [
    "FirstPassLoadings",
    "MARKET_PREMIUM_COMPARATORS",
    "MARKET_PREMIUM_LONGEST_SAMPLE",
    "MODES",
    "PremiumSeries",
    "ROLLING_WINDOWS",
    "annualized_premia",
    "comparator_etc",
    "fama_macbeth_tstat",
    "first_pass",
    "option_impact_tables",
    "path_weights",
    "second_pass",
    "weighted_premium_series",
]
