"""
Dense OLS with iid and Newey-West (Bartlett) standard errors.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np
from statsmodels.stats.sandwich_covariance import S_hac_simple

from utils.errors import DomainError, SingularDesignError

RCOND_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class RegressionResult:
    """Fitted linear model

    ``k`` counts regressors excluding the intercept; ``yvar`` is the
    divide-by-n variance of the dependent variable.
    """

    coefficients: np.ndarray
    se_iid: np.ndarray
    t_iid: np.ndarray
    rss: float
    n: int
    k: int
    yvar: float
    aic: float
    se_hac: Optional[np.ndarray] = None
    t_hac: Optional[np.ndarray] = None
    hac_lag: Optional[int] = None
    residuals: np.ndarray = field(default=None, repr=False, compare=False)

    def se(self, kind: str = "iid") -> np.ndarray:
        if kind == "iid":
            return self.se_iid
        if kind == "hac":
            if self.se_hac is None:
                raise DomainError("HAC standard errors were not computed for this fit")
            return self.se_hac
        raise DomainError(f"Unknown standard-error kind '{kind}'")

    def t(self, kind: str = "iid") -> np.ndarray:
        return self.t_iid if kind == "iid" else _tstats(self.coefficients, self.se(kind))

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload.pop("residuals")
        for key, value in payload.items():
            if isinstance(value, np.ndarray):
                payload[key] = value.tolist()
        return payload


def default_hac_lag(n: int) -> int:
    """Plug-in lag floor(4 (n/100)^(2/9))."""
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def _tstats(coefficients: np.ndarray, se: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(se > 0, coefficients / se, np.nan)


def _check_design(X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2:
        raise DomainError(f"Design must be 2-D, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise DomainError(f"Dependent variable has shape {y.shape}, design has {X.shape[0]} rows")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise DomainError("Regression inputs contain missing or infinite values")
    if X.shape[0] <= X.shape[1]:
        raise DomainError(f"Need more observations than columns, got n={X.shape[0]}, K={X.shape[1]}")
    if 1.0 / np.linalg.cond(X) < RCOND_TOLERANCE:
        raise SingularDesignError(f"Design is rank deficient (reciprocal condition number < {RCOND_TOLERANCE})")


def newey_west_se(X, y, residuals, lag: int) -> np.ndarray:
    """HAC standard errors (X'X)^-1 S (X'X)^-1 with Bartlett weights 1 - l/(L+1)."""
    X = np.asarray(X, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    n = X.shape[0]
    if len(np.asarray(y)) != n or residuals.shape != (n,):
        raise DomainError("X, y and residuals must share their number of observations")
    if lag < 0 or lag >= n:
        raise DomainError(f"HAC lag must lie in [0, n), got {lag} with n={n}")
    xtx_inv = np.linalg.inv(X.T @ X)
    core = S_hac_simple(X * residuals[:, None], nlags=int(lag))
    covariance = xtx_inv @ core @ xtx_inv
    return np.sqrt(np.clip(np.diag(covariance), 0.0, None))


def ols(X, y, hac_lag: Union[int, str, None] = None, has_intercept: bool = True) -> RegressionResult:
    """Least squares with iid (and optionally HAC) standard errors

    Args:
        X: Design matrix, intercept column included by the caller
        y: Dependent variable
        hac_lag: None for iid only, an integer lag, or "auto" for the plug-in lag
        has_intercept: Whether X carries an intercept column (sets ``k``)

    Returns:
        RegressionResult
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_design(X, y)
    n, n_columns = X.shape

    coefficients = np.linalg.lstsq(X, y, rcond=None)[0]
    residuals = y - X @ coefficients
    rss = float(residuals @ residuals)
    sigma2 = rss / (n - n_columns)
    xtx_inv = np.linalg.inv(X.T @ X)
    se_iid = np.sqrt(np.clip(np.diag(sigma2 * xtx_inv), 0.0, None))
    with np.errstate(divide="ignore"):
        aic = float(n * np.log(rss / n) + 2 * (n_columns + 1))

    se_hac = t_hac = lag = None
    if hac_lag is not None:
        lag = default_hac_lag(n) if hac_lag == "auto" else int(hac_lag)
        se_hac = newey_west_se(X, y, residuals, lag)
        t_hac = _tstats(coefficients, se_hac)

    return RegressionResult(
        coefficients=coefficients,
        se_iid=se_iid,
        t_iid=_tstats(coefficients, se_iid),
        rss=rss,
        n=n,
        k=n_columns - 1 if has_intercept else n_columns,
        yvar=float(np.var(y)),
        aic=aic,
        se_hac=se_hac,
        t_hac=t_hac,
        hac_lag=lag,
        residuals=residuals,
    )
