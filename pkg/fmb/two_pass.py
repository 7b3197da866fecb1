"""
Two-pass (Fama-MacBeth) estimation of factor premia.

First pass: time-series regressions of each asset on all factors, either
over the full sample or over trailing windows. Rolling loadings used for
month t come from a window that ends before month t starts.

Second pass: one cross-sectional regression per month of asset returns on
the loadings (plus an intercept).
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from statsmodels.regression.rolling import RollingOLS
from statsmodels.tools import add_constant

from datapanel.transforms import winsorize_fraction
from regression.ols import ols
from utils.errors import DomainError, SingularDesignError

MODES = ("full", "rolling_short", "rolling_long")
ROLLING_WINDOWS = {
    "monthly": {"rolling_short": 24, "rolling_long": 60},
    "daily": {"rolling_short": 120, "rolling_long": 300},
}


@dataclass
class FirstPassLoadings:
    """Per-asset loadings on every factor

    Full-sample loadings are indexed by asset; rolling loadings by
    (month, asset) where month is a monthly Period.
    """

    betas: pd.DataFrame
    intercepts: pd.Series
    mode: str
    frequency: str
    window: Optional[int] = None
    status: Dict[str, str] = field(default_factory=dict)

    @property
    def factors(self) -> List[str]:
        return list(self.betas.columns)

    @classmethod
    def fixed(cls, betas: pd.DataFrame, intercepts: Optional[pd.Series] = None) -> "FirstPassLoadings":
        """Wrap a known asset x factor loading table."""
        if intercepts is None:
            intercepts = pd.Series(0.0, index=betas.index)
        return cls(betas.astype(float), intercepts, "full", "monthly")

    def at(self, date) -> pd.DataFrame:
        """Loadings usable for returns realized in the month of ``date``."""
        if self.mode == "full":
            return self.betas
        month = pd.Timestamp(date).to_period("M")
        try:
            return self.betas.xs(month, level="month")
        except KeyError:
            return self.betas.iloc[0:0].droplevel("month")


def _align(returns: pd.DataFrame, factors: pd.DataFrame):
    common = returns.index.intersection(factors.index)
    if len(common) == 0:
        raise DomainError("Asset returns and factors share no dates")
    return returns.loc[common], factors.loc[common]


def first_pass(returns: pd.DataFrame, factors: pd.DataFrame, mode: str = "full",
               frequency: str = "monthly") -> FirstPassLoadings:
    """Time-series regressions of every asset on all factors."""
    if mode not in MODES:
        raise DomainError(f"Unknown first-pass mode '{mode}', expected one of {MODES}")
    if frequency not in ROLLING_WINDOWS:
        raise DomainError(f"Unknown frequency '{frequency}'")
    returns, factors = _align(returns, factors)
    n_factors = factors.shape[1]
    exog = add_constant(factors, has_constant="add")
    status: Dict[str, str] = {}

    if mode == "full":
        rows, intercepts = {}, {}
        for asset in returns.columns:
            y = returns[asset]
            usable = y.notna().to_numpy() & np.isfinite(exog.to_numpy()).all(axis=1)
            if usable.sum() <= n_factors + 1:
                status[str(asset)] = "insufficient_window"
                continue
            try:
                fit = ols(exog.to_numpy()[usable], y.to_numpy()[usable])
            except SingularDesignError:
                status[str(asset)] = "singular_design"
                continue
            intercepts[asset] = fit.coefficients[0]
            rows[asset] = fit.coefficients[1:]
            status[str(asset)] = "ok"
        betas = pd.DataFrame.from_dict(rows, orient="index", columns=list(factors.columns))
        return FirstPassLoadings(betas, pd.Series(intercepts, dtype=float), mode, frequency, None, status)

    window = ROLLING_WINDOWS[frequency][mode]
    if window <= n_factors + 1:
        raise DomainError(f"Window of {window} observations is too short for {n_factors} factors")
    pieces, intercept_pieces = [], []
    for asset in returns.columns:
        y = returns[asset]
        if y.notna().sum() < window:
            status[str(asset)] = "insufficient_window"
            continue
        params = RollingOLS(y, exog, window=window, missing="skip").fit(params_only=True).params
        # snapshot at the end of each month, used for the following month
        monthly = params.groupby(params.index.to_period("M")).last()
        monthly.index = monthly.index + 1
        monthly = monthly.dropna(how="any")
        if monthly.empty:
            status[str(asset)] = "insufficient_window"
            continue
        monthly.index.name = "month"
        monthly["asset"] = asset
        pieces.append(monthly.set_index("asset", append=True))
        status[str(asset)] = "ok"
    if not pieces:
        empty = pd.MultiIndex.from_arrays([pd.PeriodIndex([], freq="M"), []], names=["month", "asset"])
        return FirstPassLoadings(pd.DataFrame(index=empty, columns=list(factors.columns), dtype=float),
                                 pd.Series(index=empty, dtype=float), mode, frequency, window, status)
    stacked = pd.concat(pieces).sort_index()
    betas = stacked[list(factors.columns)]
    return FirstPassLoadings(betas, stacked["const"], mode, frequency, window, status)


@dataclass
class PremiumSeries:
    """Per-date premia with cross-sectional fit diagnostics.

    ``frame`` has one row per second-pass date with columns gamma_0,
    gamma_<factor>, se_<factor>, aic, rss, yvar, n, status.
    """

    frame: pd.DataFrame
    factors: List[str]

    def ok(self) -> pd.DataFrame:
        return self.frame[self.frame["status"] == "ok"]

    def gamma(self, factor: str) -> pd.Series:
        return self.ok()[f"gamma_{factor}"]

    def average(self, factor: str) -> float:
        return float(self.gamma(factor).mean())


def second_pass(returns: pd.DataFrame, loadings: FirstPassLoadings,
                winsorize_loadings: float = 0.0) -> PremiumSeries:
    """Cross-sectional regression of returns on loadings for every date."""
    factors = loadings.factors
    n_factors = len(factors)
    records = []
    for date in returns.index:
        row = {"date": date, "status": "ok", "n": 0}
        betas = loadings.at(date)
        y = returns.loc[date].reindex(betas.index)
        usable = y.notna().to_numpy() & betas.notna().all(axis=1).to_numpy()
        row["n"] = int(usable.sum())
        if usable.sum() < n_factors + 2:
            row["status"] = "thin_cross_section"
            records.append(row)
            continue
        design = betas.to_numpy(dtype=float)[usable]
        if winsorize_loadings > 0:
            design = np.column_stack([winsorize_fraction(design[:, j], winsorize_loadings)
                                      for j in range(n_factors)])
        try:
            fit = ols(add_constant(design, has_constant="add"), y.to_numpy(dtype=float)[usable])
        except SingularDesignError:
            row["status"] = "singular_design"
            records.append(row)
            continue
        row["gamma_0"] = fit.coefficients[0]
        for j, factor in enumerate(factors):
            row[f"gamma_{factor}"] = fit.coefficients[j + 1]
            row[f"se_{factor}"] = fit.se_iid[j + 1]
        row.update(aic=fit.aic, rss=fit.rss, yvar=fit.yvar)
        records.append(row)
    columns = (["date", "gamma_0"] + [f"gamma_{f}" for f in factors] + [f"se_{f}" for f in factors]
               + ["aic", "rss", "yvar", "n", "status"])
    frame = pd.DataFrame(records).reindex(columns=columns).set_index("date")
    return PremiumSeries(frame, factors)
