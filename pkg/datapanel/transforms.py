"""
Data-preparation transforms.

Vector transforms take and return 1-D float arrays; panel transforms return
new panels. All of them are pure.
"""

import math
from typing import Iterable, Tuple

import numpy as np

from datapanel.panel import DataPanel, TransformReport
from utils.errors import DomainError


def impute_forward(panel: DataPanel, column: str) -> Tuple[DataPanel, TransformReport]:
    """Replace every missing cell of ``column`` by the last present value."""
    values = panel.column(column)
    missing = np.isnan(values)
    if values.size and missing[0]:
        raise DomainError(f"Column '{column}' starts with a missing value; nothing to carry forward")
    filled = panel.to_frame()[column].ffill().to_numpy()
    report = TransformReport("impute_forward", int(missing.sum()), {"column": column})
    return panel.with_column(column, filled), report


def drop_missing_rows(panel: DataPanel, columns: Iterable[str]) -> DataPanel:
    columns = list(columns)
    panel.require(columns)
    keep = ~panel.missing_mask(columns).any(axis=1).to_numpy()
    return panel.take_rows(np.flatnonzero(keep))


def winsorize(vector, k: int) -> np.ndarray:
    """Clamp the k smallest and k largest values to the neighbouring order statistics

    Missing entries are left in place and do not count towards N.
    """
    values = np.array(vector, dtype=float)
    if k < 0:
        raise DomainError(f"Winsorization count must be non-negative, got {k}")
    present = np.flatnonzero(~np.isnan(values))
    n = present.size
    if 2 * k >= n and k > 0:
        raise DomainError(f"Cannot winsorize {k} values per tail out of {n}")
    if k == 0:
        return values
    order = present[np.argsort(values[present], kind="stable")]
    low = values[order[k]]
    high = values[order[n - k - 1]]
    values[order[:k]] = low
    values[order[n - k:]] = high
    return values


def winsorize_fraction(vector, alpha: float) -> np.ndarray:
    """Winsorize floor(alpha * N) values per tail."""
    if not 0 <= alpha < 0.5:
        raise DomainError(f"Winsorization level must lie in [0, 0.5), got {alpha}")
    values = np.asarray(vector, dtype=float)
    n = int(np.count_nonzero(~np.isnan(values)))
    return winsorize(values, int(math.floor(alpha * n)))


def difference(vector) -> np.ndarray:
    values = np.asarray(vector, dtype=float)
    if values.size < 2:
        raise DomainError(f"Differencing needs at least 2 values, got {values.size}")
    return np.diff(values)


def cumulative_sum(vector) -> np.ndarray:
    return np.cumsum(np.asarray(vector, dtype=float))


def standardize(vector) -> np.ndarray:
    """Zero mean, unit standard deviation (divide-by-N convention)."""
    values = np.asarray(vector, dtype=float)
    sd = values.std()
    if values.size == 0 or not sd > 0:
        raise DomainError("Cannot standardize a vector with zero variance")
    return (values - values.mean()) / sd


def scale_dependent(returns, horizon: int, periods_per_month: int) -> np.ndarray:
    """Bring h-period returns back to a monthly scale: y / sqrt(h * m)."""
    scale = horizon * periods_per_month
    if horizon < 1 or scale <= 0:
        raise DomainError(f"horizon * periods_per_month must be positive, got {horizon} * {periods_per_month}")
    return np.asarray(returns, dtype=float) / math.sqrt(scale)
