"""
Predictive regressions of future cumulative returns on a lagged predictor.

Standard form:   y_{t+h} = a + b x_t + e
Augmented form:  y_{t+h} = a + b x_t + g v_{t+1} + e,  v_t = x_t - delta x_{t-1}

where y_{t+h} is the sum of the per-period returns over t+1..t+h and delta
comes from the AR(1) fit of the predictor (optionally bias-corrected).
"""

from typing import Tuple, Union

import numpy as np
from statsmodels.tools import add_constant

from datapanel.transforms import cumulative_sum
from regression.ols import RegressionResult, ols
from utils.errors import DomainError, InsufficientWindowError


def lead_sum(y, horizon: int) -> np.ndarray:
    """target[t] = y[t+1] + ... + y[t+h] for t = 0..T-h-1."""
    values = np.asarray(y, dtype=float)
    if horizon < 1:
        raise DomainError(f"Horizon must be at least 1, got {horizon}")
    if values.size <= horizon:
        return np.empty(0)
    totals = np.concatenate([[0.0], cumulative_sum(values)])
    return totals[1 + horizon:] - totals[1:-horizon]


def amihud_corrected_delta(delta: float, n: int) -> float:
    """delta + (1 + 3 delta)/n + 3 (1 + 3 delta)/n^2."""
    if n <= 0:
        raise DomainError(f"Sample size must be positive, got {n}")
    return delta + (1.0 + 3.0 * delta) / n + 3.0 * (1.0 + 3.0 * delta) / n ** 2


def ar1_coefficient(x) -> Tuple[float, int]:
    """Slope of x_t on x_{t-1} (with intercept) and the number of pairs used."""
    values = np.asarray(x, dtype=float)
    fit = ols(add_constant(values[:-1], has_constant="add"), values[1:])
    return float(fit.coefficients[1]), fit.n


def _check_predictor(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise DomainError(f"Predictor and returns must align, got {x.shape} and {y.shape}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DomainError("Predictive regressions need complete series")
    if x.size < 2 or not np.var(x) > 0:
        raise DomainError("Predictor has zero variance")


def predictive_ols(x, y, horizon: int = 1, hac_lag: Union[int, str, None] = "auto") -> RegressionResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_predictor(x, y)
    target = lead_sum(y, horizon)
    n = target.size
    if n <= 3:
        raise InsufficientWindowError(f"Only {n} observations left after a {horizon}-period lead")
    design = add_constant(x[:n], has_constant="add")
    return ols(design, target, hac_lag=hac_lag)


def augmented_predictive(x, y, horizon: int = 1, use_amihud_correction: bool = True,
                         hac_lag: Union[int, str, None] = "auto") -> RegressionResult:
    """Augmented predictive regression; coefficient 1 is b, coefficient 2 is g."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_predictor(x, y)
    delta, n_ar = ar1_coefficient(x)
    if use_amihud_correction:
        delta = amihud_corrected_delta(delta, n_ar)
    innovations = x[1:] - delta * x[:-1]  # innovations[t] = v_{t+1}

    target = lead_sum(y, horizon)
    n = target.size
    k = 2
    if n <= k + 2:
        raise InsufficientWindowError(f"Only {n} observations left for the augmented regression")
    design = add_constant(np.column_stack([x[:n], innovations[:n]]), has_constant="add")
    return ols(design, target, hac_lag=hac_lag)
