"""Long-short portfolio sorts on stock characteristics."""

from sorting.portfolios import (
    CLEANINGS,
    MIN_MONTHS,
    MIN_STOCKS,
    WEIGHTINGS,
    LongShortSeries,
    PreparedSorts,
    SortConfig,
    clean_characteristic,
    form_from_section,
    form_portfolio,
    longshort_from_prepared,
    longshort_returns,
    prepare_sorts,
    sharpe_tstat,
)

__all__ = [
    "CLEANINGS",
    "MIN_MONTHS",
    "MIN_STOCKS",
    "WEIGHTINGS",
    "LongShortSeries",
    "PreparedSorts",
    "SortConfig",
    "clean_characteristic",
    "form_from_section",
    "form_portfolio",
    "longshort_from_prepared",
    "longshort_returns",
    "prepare_sorts",
    "sharpe_tstat",
]
