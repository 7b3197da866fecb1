"""
Equity-premium predictability study.

Every path picks a data frequency, a missing-data rule, a winsorization
level for the predictor, level or first difference, one of the six macro
predictors, a forecast horizon, a subsample, an estimator and a
post-treatment, and reports the slope on the standardized predictor.
"""

import math
from typing import Any, Dict, List, Tuple

import numpy as np

from datapanel.ingest import GOYAL_WELCH_PREDICTORS, to_frequency
from datapanel.panel import FREQUENCIES, DataPanel
from datapanel.transforms import (
    difference,
    drop_missing_rows,
    impute_forward,
    scale_dependent,
    standardize,
    winsorize_fraction,
)
from pathgrid.grid import PathAssignment
from regression.post_treatment import apply_post_treatment, get_post_treatment
from regression.predictive import augmented_predictive, predictive_ols
from studies.base_study import BaseStudy
from studies.outcomes import PathOutcome
from utils.errors import InsufficientWindowError, SpecValidationError

LAYERS = ("frequency", "missing", "winsorization", "transform", "predictor", "horizon",
          "start", "end", "estimator", "post_treatment")
START_FRACTIONS = {"first": 0.0, "middle": 0.5}
END_FRACTIONS = {"end": 1.0, "middle": 0.5}
MODELS = {"ols": "ols", "aug": "augmented", "augmented": "augmented"}


def parse_estimator(option: str, payload: Any) -> Tuple[str, str]:
    """(model, se kind) from an option like 'aug_hac' or a {model, se} payload."""
    if isinstance(payload, dict):
        model, kind = payload.get("model"), payload.get("se")
    else:
        model, _, kind = str(option).partition("_")
    model = MODELS.get(model)
    if model is None or kind not in ("iid", "hac"):
        raise SpecValidationError(f"Cannot read estimator option '{option}', expected <ols|aug>_<iid|hac>")
    return model, kind


def window_bounds(n_rows: int, start: str, end: str, start_payload: Any = None,
                  end_payload: Any = None) -> Tuple[int, int]:
    """Half-open row window; 'middle' is floor(N/2)."""
    start_fraction = start_payload if isinstance(start_payload, (int, float)) else START_FRACTIONS.get(start)
    end_fraction = end_payload if isinstance(end_payload, (int, float)) else END_FRACTIONS.get(end)
    if start_fraction is None or end_fraction is None:
        raise SpecValidationError(f"Unknown subsample options start='{start}', end='{end}'")
    return int(math.floor(start_fraction * n_rows)), int(math.floor(end_fraction * n_rows))


class PremiumStudy(BaseStudy):
    """Predictive regressions of the equity premium on macro predictors."""

    kind = "premium"
    DEFAULT_SETTINGS = {
        "min_observations": 30,
        "hac_lag": "auto",
        "amihud_correction": True,
        "predictors": list(GOYAL_WELCH_PREDICTORS),
    }

    def prepare(self) -> None:
        missing = [name for name in LAYERS if name not in self.spec.names]
        if missing:
            raise SpecValidationError(f"Premium study '{self.spec.study_id}' lacks layer(s) {missing}")
        if "macro" not in self.data:
            raise SpecValidationError("Premium study needs a 'macro' data input")
        for option in self.spec.layer("estimator").options:
            parse_estimator(option, self.spec.layer("estimator").payload(option))
        for option in self.spec.layer("post_treatment").options:
            get_post_treatment(option)

        monthly: DataPanel = self.data["macro"]
        self.panels: Dict[str, DataPanel] = {}
        for option in self.spec.layer("frequency").options:
            frequency = self.spec.layer("frequency").payload(option) or option
            if frequency not in FREQUENCIES or frequency == "daily":
                raise SpecValidationError(f"Unsupported premium-study frequency '{frequency}'")
            supplied = self.data.get(f"macro_{frequency}")
            self.panels[frequency] = supplied if supplied is not None else to_frequency(monthly, frequency)
        self.logger.debug(f"Prepared panels: { {k: len(v) for k, v in self.panels.items()} }")

    def clean_series(self, panel: DataPanel, predictor: str, missing: str) -> Tuple[np.ndarray, np.ndarray]:
        """Predictor and premium after missing-data handling, aligned row by row."""
        panel.require([predictor, "premium"])
        if missing == "remove":
            columns = [c for c in self.settings["predictors"] if c in panel] + ["premium"]
            panel = drop_missing_rows(panel, columns)
        elif missing == "impute":
            panel = panel.trim_leading_missing(predictor)
            if len(panel) == 0:
                raise InsufficientWindowError(f"Predictor '{predictor}' is never observed")
            panel, _ = impute_forward(panel, predictor)
            panel = drop_missing_rows(panel, ["premium"])
        else:
            raise SpecValidationError(f"Unknown missing-data option '{missing}'")

        x = panel.column(predictor)
        y = panel.column("premium")
        if x.size < 2:
            raise InsufficientWindowError(f"Only {x.size} usable rows for '{predictor}'")
        return x, y

    @staticmethod
    def transform_window(x: np.ndarray, y: np.ndarray, winsor_level: float,
                         transform: str) -> Tuple[np.ndarray, np.ndarray]:
        """Winsorize, optionally difference, then standardize the predictor of one estimation window."""
        x = winsorize_fraction(x, float(winsor_level))
        if transform == "diff":
            x = difference(x)
            y = y[1:]
        elif transform != "level":
            raise SpecValidationError(f"Unknown transform option '{transform}'")
        return standardize(x), y

    def run_group(self, assignments: List[PathAssignment]) -> List[PathOutcome]:
        return [self.run_assignment(assignment) for assignment in assignments]

    def run_assignment(self, assignment: PathAssignment) -> PathOutcome:
        _, frequency = self.option(assignment, "frequency")
        missing, _ = self.option(assignment, "missing")
        _, winsor_level = self.option(assignment, "winsorization")
        transform, _ = self.option(assignment, "transform")
        _, predictor = self.option(assignment, "predictor")
        _, horizon = self.option(assignment, "horizon")
        start, start_payload = self.option(assignment, "start")
        end, end_payload = self.option(assignment, "end")
        estimator, estimator_payload = self.option(assignment, "estimator")
        treatment, _ = self.option(assignment, "post_treatment")

        panel = self.panels[frequency]
        horizon = int(horizon)
        x, y = self.clean_series(panel, predictor, missing)
        first, last = window_bounds(x.size, start, end,
                                    None if start_payload == start else start_payload,
                                    None if end_payload == end else end_payload)
        n_obs = (last - first) - (1 if transform == "diff" else 0) - horizon
        if n_obs < self.settings["min_observations"]:
            return PathOutcome.failed(assignment.index, "discarded")
        # Winsorization cut-offs and standardization moments come from the window only
        x, y = self.transform_window(x[first:last], y[first:last], winsor_level, transform)


        y = scale_dependent(y, horizon, panel.periods_per_month)
        model, se_kind = parse_estimator(estimator, estimator_payload)
        hac_lag = self.settings["hac_lag"]
        if model == "augmented":
            fit = augmented_predictive(x, y, horizon, use_amihud_correction=bool(self.settings["amihud_correction"]),
                                       hac_lag=hac_lag)
        else:
            fit = predictive_ols(x, y, horizon, hac_lag=hac_lag)

        b = float(fit.coefficients[1])
        se_iid = float(fit.se_iid[1])
        se_hac = float(fit.se_hac[1])
        se = se_hac if se_kind == "hac" else se_iid
        estimate = {"b": b, "se_iid": se_iid, "se_hac": se_hac, "se": se, "t": b / se if se > 0 else np.nan}
        estimate = apply_post_treatment(treatment, estimate)
        extra = {"hac_lag": float(fit.hac_lag)}
        if model == "augmented":
            extra["innovation_coef"] = float(fit.coefficients[2])
        return PathOutcome(assignment.index, "ok", aic=fit.aic, n=fit.n, rss=fit.rss, yvar=fit.yvar, k=fit.k,
                           extra=extra, **estimate)


def run_premium_study(config, panel: DataPanel, n_jobs: int = 1, debug_mode: bool = False):
    """Execute every feasible path of a premium study on a monthly macro panel."""
    return PremiumStudy(config, {"macro": panel}, debug_mode).run(n_jobs=n_jobs)
