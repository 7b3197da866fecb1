"""
Conditional averages: split paths by one layer's option and test the
difference between twin paths that differ only at that layer.
"""

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from averaging.weights import SCHEMES, frequentist_weights, posterior_probabilities, uniform_weights
from utils.errors import DomainError, PairingError, SchemaError

IDENTITY_TOLERANCE = 1e-12
STAR_LEVELS = ((0.01, "***"), (0.05, "**"), (0.1, "*"))


@dataclass
class ConditionalSplit:
    """Twin-aligned outcome rows for two options of one layer.

    Row i of ``paths_a`` and row i of ``paths_b`` differ only at ``layer``.
    """

    layer: str
    option_a: str
    option_b: str
    paths_a: pd.DataFrame
    paths_b: pd.DataFrame
    n_dropped: int = 0

    @property
    def n_pairs(self) -> int:
        return len(self.paths_a)


@dataclass
class ConditionalTestReport:
    layer: str
    option_a: str
    option_b: str
    n_pairs: int
    n_dropped: int
    mean_a: float
    mean_b: float
    mean_difference: float
    identity_gap: float
    t_stat: float
    p_value: float
    note: Optional[str]
    deltas: np.ndarray = field(repr=False)
    weights_a: np.ndarray = field(repr=False)
    weights_b: np.ndarray = field(repr=False)

    @property
    def stars(self) -> str:
        return significance_stars(self.p_value)

    def to_dict(self, include_series: bool = False) -> Dict[str, Any]:
        payload = {
            "layer": self.layer,
            "option_a": self.option_a,
            "option_b": self.option_b,
            "n_pairs": self.n_pairs,
            "n_dropped": self.n_dropped,
            "mean_a": self.mean_a,
            "mean_b": self.mean_b,
            "mean_difference": self.mean_difference,
            "identity_gap": self.identity_gap,
            "t_stat": self.t_stat,
            "p_value": self.p_value,
            "stars": self.stars,
            "note": self.note,
        }
        if include_series:
            payload["deltas"] = self.deltas.tolist()
            payload["weights_a"] = self.weights_a.tolist()
            payload["weights_b"] = self.weights_b.tolist()
        return payload


def significance_stars(p_value: float) -> str:
    if not np.isfinite(p_value):
        return ""
    for level, stars in STAR_LEVELS:
        if p_value < level:
            return stars
    return ""


def _frame_and_layers(outcomes, layers: Optional[Sequence[str]] = None):
    frame = getattr(outcomes, "frame", outcomes)
    if layers is None:
        spec = getattr(outcomes, "spec", None)
        if spec is None:
            raise DomainError("Layer names are required when outcomes carry no study spec")
        layers = list(spec.names)
    missing = [name for name in list(layers) + ["status"] if name not in frame.columns]
    if missing:
        raise SchemaError(f"Outcome table misses column(s) {missing}")
    return frame, list(layers)


def conditional_split(outcomes, layer: str, option_a: str, option_b: str, drop_unpaired: bool = False,
                      layers: Optional[Sequence[str]] = None) -> ConditionalSplit:
    """Pair every path through ``option_a`` with its twin through ``option_b``

    Pairs where either side is missing or has a non-ok status raise
    PairingError unless ``drop_unpaired`` is set, in which case they are
    skipped and counted.
    """
    frame, layers = _frame_and_layers(outcomes, layers)
    if layer not in layers:
        raise DomainError(f"Unknown layer '{layer}'")
    if option_a == option_b:
        raise DomainError("The two options of a split must differ")
    others = [name for name in layers if name != layer]
    side_a = frame[frame[layer] == option_a]
    side_b = frame[frame[layer] == option_b]
    if side_a.empty or side_b.empty:
        raise PairingError(f"No paths through {layer}={option_a if side_a.empty else option_b}")

    keys = others if others else None
    if keys:
        merged = side_a.merge(side_b, on=keys, how="outer", suffixes=("_a", "_b"), indicator=True,
                              validate="one_to_one")
    else:
        merged = pd.concat([side_a.add_suffix("_a").reset_index(drop=True),
                            side_b.add_suffix("_b").reset_index(drop=True)], axis=1)
        merged["_merge"] = "both"
    paired = (merged["_merge"] == "both") & (merged["status_a"] == "ok") & (merged["status_b"] == "ok")
    n_dropped = int((~paired).sum())
    if n_dropped and not drop_unpaired:
        raise PairingError(f"{n_dropped} path(s) through {layer} in {{{option_a}, {option_b}}} "
                           f"lack an ok twin")
    merged = merged[paired.to_numpy()]
    if merged.empty:
        raise PairingError(f"No complete twin pairs for {layer}: {option_a} vs {option_b}")

    def side(suffix: str) -> pd.DataFrame:
        columns = {c: c[: -len(suffix)] for c in merged.columns if c.endswith(suffix) and c not in others}
        part = merged[list(others) + list(columns)].rename(columns=columns)
        return part.reset_index(drop=True)

    return ConditionalSplit(layer, option_a, option_b, side("_a"), side("_b"), n_dropped)


def subset_weights(paths: pd.DataFrame, scheme: str, reading: str = "repaired") -> np.ndarray:
    """Weights normalized within one option's paths."""
    if scheme not in SCHEMES:
        raise DomainError(f"Unknown weighting scheme '{scheme}', expected one of {SCHEMES}")
    if scheme == "uniform":
        return uniform_weights(len(paths))
    if scheme == "frequentist":
        return frequentist_weights(paths["aic"].to_numpy(dtype=float))
    return posterior_probabilities(paths["n"], paths["k"], paths["rss"], paths["yvar"], reading)


def conditional_split_test(outcomes, layer: str, option_a: str, option_b: str, weights: str = "uniform",
                           column: str = "b", drop_unpaired: bool = False,
                           layers: Optional[Sequence[str]] = None) -> ConditionalTestReport:
    """Student t-test on Delta_p = (P/2)(w_p b_p^a - w_-p b_-p^b)

    Weights are normalized within each option subset, so the mean of
    Delta over the P/2 pairs equals the difference of weighted averages.
    With uniform weights Delta_p is the plain twin difference.
    """
    split = conditional_split(outcomes, layer, option_a, option_b, drop_unpaired, layers)
    b_a = split.paths_a[column].to_numpy(dtype=float)
    b_b = split.paths_b[column].to_numpy(dtype=float)
    w_a = subset_weights(split.paths_a, weights)
    w_b = subset_weights(split.paths_b, weights)
    m = split.n_pairs
    deltas = m * (w_a * b_a - w_b * b_b)
    mean_a = float(w_a @ b_a)
    mean_b = float(w_b @ b_b)
    mean_difference = float(deltas.mean())
    identity_gap = abs(mean_difference - (mean_a - mean_b))

    note = None
    if np.all(deltas == 0.0):
        t_stat, p_value, note = 0.0, 1.0, "exact_zero_difference"
    elif m < 2:
        t_stat, p_value, note = np.nan, np.nan, "single pair"
    elif np.ptp(deltas) == 0.0:
        t_stat, p_value, note = np.nan, np.nan, "constant difference"
    else:
        result = stats.ttest_1samp(deltas, 0.0)
        t_stat, p_value = float(result.statistic), float(result.pvalue)
    return ConditionalTestReport(layer, option_a, option_b, m, split.n_dropped, mean_a, mean_b,
                                 mean_difference, identity_gap, t_stat, p_value, note, deltas, w_a, w_b)


def layer_options(outcomes, layer: str) -> List[str]:
    spec = getattr(outcomes, "spec", None)
    if spec is not None:
        return list(spec.layer(layer).options)
    frame = getattr(outcomes, "frame", outcomes)
    return sorted(frame[layer].astype(str).unique())


def layer_impact_table(outcomes, layer: str, weights: str = "uniform", column: str = "b",
                       drop_unpaired: bool = True, layers: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """Pairwise conditional tests over every option pair of one layer

    One row per unordered pair (a, b) in option order; swapping a and b
    negates the difference and the t-statistic.
    """
    rows = []
    for option_a, option_b in itertools.combinations(layer_options(outcomes, layer), 2):
        try:
            report = conditional_split_test(outcomes, layer, option_a, option_b, weights, column,
                                            drop_unpaired, layers)
        except PairingError:
            continue
        rows.append(report.to_dict())
    columns = ["layer", "option_a", "option_b", "n_pairs", "n_dropped", "mean_a", "mean_b",
               "mean_difference", "identity_gap", "t_stat", "p_value", "stars", "note"]
    return pd.DataFrame(rows, columns=columns)
