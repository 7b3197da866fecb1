"""
Two-pass factor premium study.

Paths vary the asset set (and its weighting), the first-pass frequency,
the winsorization of asset returns before the first pass, the first-pass
regression type and the winsorization of loadings before the second pass.
The factor layer only selects which premium a path reports, so the two
passes run once per assignment of the other layers.
"""

from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from datapanel.transforms import winsorize_fraction
from fmb.two_pass import MODES, PremiumSeries, first_pass, second_pass
from pathgrid.grid import PathAssignment
from studies.base_study import BaseStudy
from studies.outcomes import OutcomeSet, PathOutcome
from utils.errors import InsufficientWindowError, IngestionError, SpecValidationError

LAYERS = ("factor", "assets", "frequency", "pre_winsor", "regression", "post_winsor")
GROUP_LAYERS = ("assets", "frequency", "pre_winsor", "regression")


def excess_returns(returns: pd.DataFrame, factors: pd.DataFrame) -> pd.DataFrame:
    """Asset returns minus the risk-free rate on the dates both files share."""
    if "RF" not in factors.columns:
        raise IngestionError("Factor file has no 'RF' column")
    common = returns.index.intersection(factors.index)
    if len(common) == 0:
        raise IngestionError("Asset and factor files share no dates")
    return returns.loc[common].sub(factors.loc[common, "RF"], axis=0)


def winsorize_columns(frame: pd.DataFrame, level: float) -> pd.DataFrame:
    """Winsorize every asset's return series separately."""
    if level <= 0:
        return frame
    return frame.apply(lambda column: pd.Series(winsorize_fraction(column.to_numpy(dtype=float), level),
                                                index=column.index))


class FmbStudy(BaseStudy):
    """Two-pass premia for every factor along every path."""

    kind = "fmb"
    DEFAULT_SETTINGS = {
        "min_months": 24,
    }

    def prepare(self) -> None:
        missing = [name for name in LAYERS if name not in self.spec.names]
        if missing:
            raise SpecValidationError(f"FMB study '{self.spec.study_id}' lacks layer(s) {missing}")
        for option in self.spec.layer("regression").options:
            mode = self.spec.layer("regression").payload(option) or option
            if mode not in MODES:
                raise SpecValidationError(f"Unknown regression option '{option}', expected one of {MODES}")
        self.factor_names = [self.spec.layer("factor").payload(o) or o for o in self.spec.layer("factor").options]
        needed = {"factors"}
        frequencies = [self.spec.layer("frequency").payload(o) or o for o in self.spec.layer("frequency").options]
        for option in self.spec.layer("assets").options:
            key = self.spec.layer("assets").payload(option) or option
            needed.add(key)
            if "daily" in frequencies:
                needed.add(f"{key}_daily")
        if "daily" in frequencies:
            needed.add("factors_daily")
        absent = sorted(key for key in needed if key not in self.data)
        if absent:
            raise IngestionError(f"FMB study '{self.spec.study_id}' is missing data input(s) {absent}")
        for key in ("factors", "factors_daily"):
            if key in self.data:
                unknown = [f for f in self.factor_names if f not in self.data[key].columns]
                if unknown:
                    raise IngestionError(f"Data input '{key}' has no factor column(s) {unknown}")

    def group_key(self, assignment: PathAssignment):
        return tuple(assignment.choice(layer) for layer in GROUP_LAYERS)

    def first_pass_inputs(self, asset_key: str, frequency: str, pre_level: float) -> Tuple[pd.DataFrame, pd.DataFrame, pd.DataFrame]:
        """(first-pass returns, first-pass factors, second-pass monthly returns), all in excess of RF."""
        monthly = winsorize_columns(excess_returns(self.data[asset_key], self.data["factors"]), pre_level)
        if frequency == "daily":
            factors = self.data["factors_daily"]
            returns = winsorize_columns(excess_returns(self.data[f"{asset_key}_daily"], factors), pre_level)
        elif frequency == "monthly":
            factors = self.data["factors"]
            returns = monthly
        else:
            raise SpecValidationError(f"Unknown frequency '{frequency}' for the first pass")
        return returns, factors[self.factor_names], monthly

    def run_group(self, assignments: List[PathAssignment]) -> List[PathOutcome]:
        first = assignments[0]
        _, asset_key = self.option(first, "assets")
        _, frequency = self.option(first, "frequency")
        _, pre_level = self.option(first, "pre_winsor")
        _, mode = self.option(first, "regression")
        returns, factors, monthly = self.first_pass_inputs(asset_key, frequency, float(pre_level))
        loadings = first_pass(returns, factors, mode=mode, frequency=frequency)
        failed = sum(1 for status in loadings.status.values() if status != "ok")
        if failed:
            self.logger.debug(f"{asset_key}/{frequency}/{mode}: {failed} assets without loadings")

        premia: Dict[float, PremiumSeries] = {}
        outcomes = []
        for assignment in assignments:
            _, post_level = self.option(assignment, "post_winsor")
            post_level = float(post_level)
            if post_level not in premia:
                premia[post_level] = second_pass(monthly, loadings, winsorize_loadings=post_level)
            _, factor = self.option(assignment, "factor")
            outcomes.append(self.run_guarded(
                assignment, lambda a, series=premia[post_level], f=factor: self.premium_outcome(a, series, f)))
        return outcomes

    def premium_outcome(self, assignment: PathAssignment, premia: PremiumSeries, factor: str) -> PathOutcome:
        ok = premia.ok()
        gammas = ok[f"gamma_{factor}"].to_numpy(dtype=float)
        if gammas.size < self.settings["min_months"]:
            raise InsufficientWindowError(f"Only {gammas.size} second-pass months, need {self.settings['min_months']}")
        b = float(gammas.mean())
        sd = float(gammas.std(ddof=1))
        se = sd / np.sqrt(gammas.size)
        series = {"date": [d.strftime("%Y-%m-%d") for d in ok.index], "gamma": gammas.tolist()}
        extra = {"mean_assets": float(ok["n"].mean())}
        return PathOutcome(
            assignment.index, "ok",
            b=b, se_iid=se, se=se, t=b / se if se > 0 else np.nan,
            aic=float(ok["aic"].mean()), rss=float(ok["rss"].mean()), yvar=float(ok["yvar"].mean()),
            n=float(gammas.size), k=float(len(premia.factors)),
            extra=extra, series=series,
        )


def run_fmb_study(config, data: Dict[str, pd.DataFrame], n_jobs: int = 1, debug_mode: bool = False) -> OutcomeSet:
    """Execute every feasible path of a two-pass study

    ``data`` maps 'factors' (and 'factors_daily' when the daily option is
    used) to factor tables and every asset-set key to its return table.
    """
    return FmbStudy(config, data, debug_mode).run(n_jobs=n_jobs)
