"""
Anomalies study: long-short portfolio sorts over many characteristics.

The config declares the per-characteristic grid (cleaning, holding,
window, q, weighting); the characteristic layer is added in front of it
from the settings or from the panel's columns.
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from averaging.conditional import layer_impact_table
from pathgrid.grid import LayerSpec, PathAssignment, StudySpec, robustness_paths
from sorting.portfolios import PreparedSorts, SortConfig, longshort_from_prepared, prepare_sorts, sharpe_tstat
from studies.base_study import BaseStudy
from studies.outcomes import OutcomeSet, PathOutcome
from utils.errors import DomainError, SchemaError, SpecValidationError

LAYERS = ("cleaning", "holding", "window", "q", "weighting")
CHARACTERISTIC_LAYER = "characteristic"
RESERVED_COLUMNS = {"permno", "date", "ret", "mvel1", "retvol"}
DEFAULT_PATH = {"cleaning": "impute", "holding": "1", "window": "full", "q": "0.2", "weighting": "EW"}


def window_fractions(option: str, payload) -> Tuple[float, float]:
    if isinstance(payload, (list, tuple)) and len(payload) == 2:
        start, end = float(payload[0]), float(payload[1])
    else:
        raise SpecValidationError(f"Window option '{option}' needs a [start, end] fraction payload")
    if not 0.0 <= start < end <= 1.0:
        raise SpecValidationError(f"Window option '{option}' has fractions outside 0 <= start < end <= 1")
    return start, end


class AnomaliesStudy(BaseStudy):
    """Characteristic-sorted long-short returns along every path."""

    kind = "anomalies"
    DEFAULT_SETTINGS = {
        "characteristics": None,
        "store_series": "default",
    }

    def build_spec(self) -> StudySpec:
        base = self.config.to_spec()
        missing = [name for name in LAYERS if name not in base.names]
        if missing:
            raise SpecValidationError(f"Anomalies study '{base.study_id}' lacks layer(s) {missing}")
        if CHARACTERISTIC_LAYER in base.names:
            return base
        characteristics = self.settings.get("characteristics")
        if not characteristics:
            panel = self.data.get("characteristics")
            if panel is None:
                raise SpecValidationError("Anomalies study needs a 'characteristics' data input")
            characteristics = [c for c in panel.columns if c not in RESERVED_COLUMNS]
        return base.with_leading_layer(LayerSpec(CHARACTERISTIC_LAYER, tuple(characteristics)))

    def prepare(self) -> None:
        if "characteristics" not in self.data:
            raise SpecValidationError("Anomalies study needs a 'characteristics' data input")
        panel: pd.DataFrame = self.data["characteristics"]
        absent = [c for c in self.spec.layer(CHARACTERISTIC_LAYER).options if c not in panel.columns]
        if absent:
            raise SchemaError(f"Characteristics panel has no column(s) {absent}")
        for option in self.spec.layer("window").options:
            window_fractions(option, self.spec.layer("window").payload(option))
        self.default_choices = dict(DEFAULT_PATH)
        self.default_choices.update(self.config.default_path or {})
        unknown = [layer for layer in self.default_choices if layer not in self.spec.names]
        if unknown:
            raise SpecValidationError(f"Default path names unknown layer(s) {unknown}")
        self.default_choices = {layer: str(option) for layer, option in self.default_choices.items()}
        dates = pd.DatetimeIndex(sorted(panel["date"].unique()))
        self.dates = dates

    def group_key(self, assignment: PathAssignment):
        return assignment.choice(CHARACTERISTIC_LAYER), assignment.choice("cleaning")

    def is_default(self, assignment: PathAssignment) -> bool:
        return all(assignment.choice(layer) == option for layer, option in self.default_choices.items())

    def sort_config(self, assignment: PathAssignment) -> SortConfig:
        _, holding = self.option(assignment, "holding")
        window, window_payload = self.option(assignment, "window")
        _, q = self.option(assignment, "q")
        _, weighting = self.option(assignment, "weighting")
        start_fraction, end_fraction = window_fractions(window, window_payload)
        n_dates = len(self.dates)
        start = self.dates[int(math.floor(start_fraction * n_dates))]
        end_position = int(math.floor(end_fraction * n_dates))
        end = None if end_position >= n_dates else self.dates[end_position]
        return SortConfig(
            characteristic=assignment.choice(CHARACTERISTIC_LAYER),
            q=float(q),
            holding=int(holding),
            weighting=str(weighting),
            cleaning=assignment.choice("cleaning"),
            start=start,
            end=end,
        )

    def run_group(self, assignments: List[PathAssignment]) -> List[PathOutcome]:
        first = assignments[0]
        prepared = prepare_sorts(self.data["characteristics"], first.choice(CHARACTERISTIC_LAYER),
                                 first.choice("cleaning"))
        return [self.run_guarded(a, lambda assignment: self.run_sort(prepared, assignment)) for a in assignments]

    def run_sort(self, prepared: PreparedSorts, assignment: PathAssignment) -> PathOutcome:
        series = longshort_from_prepared(prepared, self.sort_config(assignment))
        values = series.returns.to_numpy(dtype=float)
        t = sharpe_tstat(values)
        b = float(values.mean())
        se = float(values.std(ddof=1) / np.sqrt(values.size))
        store = self.settings["store_series"]
        stored = None
        if store == "all" or (store == "default" and self.is_default(assignment)):
            stored = {"date": [d.strftime("%Y-%m-%d") for d in series.returns.index], "ret": values.tolist()}
        extra = {
            "mean_long_count": float(series.long_counts.mean()),
            "mean_short_count": float(series.short_counts.mean()),
        }
        return PathOutcome(assignment.index, "ok", b=b, se_iid=se, se=se, t=t, n=float(values.size),
                           extra=extra, series=stored)


def run_anomalies_study(config, panel: pd.DataFrame, n_jobs: int = 1, debug_mode: bool = False) -> OutcomeSet:
    """Execute every feasible path of an anomalies study on a long stock panel."""
    return AnomaliesStudy(config, {"characteristics": panel}, debug_mode).run(n_jobs=n_jobs)


def characteristic_signs(outcomes: OutcomeSet, column: str = "t") -> pd.Series:
    """+1 or -1 per characteristic so that its median path statistic is non-negative."""
    ok = outcomes.ok().frame
    medians = ok.groupby(CHARACTERISTIC_LAYER)[column].median()
    return pd.Series(np.where(medians < 0, -1.0, 1.0), index=medians.index, name="sign")


def signed_outcomes(outcomes: OutcomeSet, columns: Sequence[str] = ("b", "t")) -> OutcomeSet:
    """Outcomes with each characteristic's effects flipped to a non-negative median t."""
    signs = characteristic_signs(outcomes)
    frame = outcomes.frame.copy()
    factor = frame[CHARACTERISTIC_LAYER].map(signs).fillna(1.0).to_numpy()
    for column in columns:
        frame[column] = frame[column].to_numpy(dtype=float) * factor
    series = outcomes.series
    if series is not None and "ret" in series.columns:
        by_path = frame.set_index("path_index")[CHARACTERISTIC_LAYER].map(signs).fillna(1.0)
        series = series.copy()
        series["ret"] = series["ret"] * series["path_index"].map(by_path).fillna(1.0).to_numpy()
    return OutcomeSet(outcomes.spec, frame, series, outcomes.metadata)


def default_choices_from(outcomes: OutcomeSet, default_path: Optional[Dict[str, str]] = None) -> Dict[str, str]:
    choices = dict(DEFAULT_PATH)
    choices.update(default_path or outcomes.metadata.get("default_path") or {})
    return choices


def anomaly_summary(outcomes: OutcomeSet, default_path: Optional[Dict[str, str]] = None,
                    column: str = "t") -> pd.DataFrame:
    """Per characteristic: median, default-path value, robustness and full intervals

    Values are sign-adjusted so that the median is non-negative; ``sign``
    records the flip.
    """
    spec = outcomes.spec
    if CHARACTERISTIC_LAYER not in spec.names:
        raise SchemaError(f"Outcomes have no '{CHARACTERISTIC_LAYER}' layer")
    choices = default_choices_from(outcomes, default_path)
    signs = characteristic_signs(outcomes, column)
    frame = outcomes.frame.set_index("path_index")
    rows = []
    for characteristic in spec.layer(CHARACTERISTIC_LAYER).options:
        paths = frame[(frame[CHARACTERISTIC_LAYER] == characteristic) & (frame["status"] == "ok")]
        if paths.empty:
            continue
        sign = float(signs.get(characteristic, 1.0))
        values = sign * paths[column].to_numpy(dtype=float)
        default = dict(choices, **{CHARACTERISTIC_LAYER: characteristic})
        default_index = spec.assignment_for(default).index
        robust_index = [a.index for a in robustness_paths(spec, default)
                        if a.choice(CHARACTERISTIC_LAYER) == characteristic] + [default_index]
        robust = sign * paths[column].reindex(robust_index).dropna().to_numpy(dtype=float)
        default_value = sign * paths[column].get(default_index, np.nan)
        rows.append({
            "characteristic": characteristic,
            "sign": sign,
            "n_ok": int(values.size),
            "median_t": float(np.median(values)),
            "default_t": float(default_value),
            "robust_low": float(robust.min()) if robust.size else np.nan,
            "robust_high": float(robust.max()) if robust.size else np.nan,
            "full_low": float(values.min()),
            "full_high": float(values.max()),
        })
    return pd.DataFrame(rows)


def default_return_matrix(outcomes: OutcomeSet, default_path: Optional[Dict[str, str]] = None,
                          signed: bool = True) -> pd.DataFrame:
    """Dates x characteristics table of default-path long-short returns."""
    if outcomes.series is None or "ret" not in outcomes.series.columns:
        raise SchemaError("Outcomes carry no stored return series")
    source = signed_outcomes(outcomes) if signed else outcomes
    spec = outcomes.spec
    choices = default_choices_from(outcomes, default_path)
    columns = {}
    for characteristic in spec.layer(CHARACTERISTIC_LAYER).options:
        index = spec.assignment_for(dict(choices, **{CHARACTERISTIC_LAYER: characteristic})).index
        piece = source.series[source.series["path_index"] == index]
        if piece.empty:
            continue
        columns[characteristic] = pd.Series(piece["ret"].to_numpy(dtype=float),
                                            index=pd.DatetimeIndex(piece["date"]))
    if not columns:
        raise DomainError("No default-path series found")
    return pd.DataFrame(columns).sort_index()


def period_comparison(outcomes: OutcomeSet, weights: str = "uniform", column: str = "t") -> pd.DataFrame:
    """Conditional tests of the path statistic across the window options."""
    return layer_impact_table(outcomes, "window", weights=weights, column=column)
