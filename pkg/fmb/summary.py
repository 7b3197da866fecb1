"""
Summaries of a two-pass study's path cloud: path-weighted monthly premia,
calendar-year averages with their dispersion across paths, option-impact
tables and the comparison with previously published market premia.
"""

from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from averaging.conditional import layer_impact_table
from averaging.weights import SCHEMES, frequentist_weights, posterior_probabilities, uniform_weights
from pathmetrics.etc import etc_score
from utils.errors import DomainError, SchemaError

# Monthly market premium for the longest sample and the values reported in earlier studies
MARKET_PREMIUM_LONGEST_SAMPLE = 0.0085
MARKET_PREMIUM_COMPARATORS = (0.0114, 0.0158, 0.0173, 0.0479)


def path_weights(frame: pd.DataFrame, scheme: str = "frequentist", reading: str = "repaired") -> pd.Series:
    """One weight per ok path (indexed by path_index), summing to one."""
    if scheme not in SCHEMES:
        raise DomainError(f"Unknown weighting scheme '{scheme}', expected one of {SCHEMES}")
    paths = frame[frame["status"] == "ok"]
    if paths.empty:
        raise DomainError("No ok paths to weight")
    if scheme == "uniform":
        weights = uniform_weights(len(paths))
    elif scheme == "frequentist":
        weights = frequentist_weights(paths["aic"].to_numpy(dtype=float))
    else:
        weights = posterior_probabilities(paths["n"], paths["k"], paths["rss"], paths["yvar"], reading)
    return pd.Series(weights, index=paths["path_index"].to_numpy(), name="weight")


def _premium_table(series: pd.DataFrame, value: str = "gamma") -> pd.DataFrame:
    missing = [c for c in ("path_index", "date", value) if c not in series.columns]
    if missing:
        raise SchemaError(f"Premium series table misses column(s) {missing}")
    table = series.pivot_table(index="date", columns="path_index", values=value, aggfunc="last")
    table.index = pd.DatetimeIndex(table.index)
    return table.sort_index()


def weighted_premium_series(outcomes, scheme: str = "frequentist", reading: str = "repaired",
                            value: str = "gamma") -> pd.Series:
    """Monthly premium averaged across paths

    Weights come from path-level fit statistics and are renormalized over
    the paths that have a premium at each date.
    """
    if outcomes.series is None or outcomes.series.empty:
        raise SchemaError("Outcomes carry no per-date premium series")
    weights = path_weights(outcomes.frame, scheme, reading)
    table = _premium_table(outcomes.series, value).reindex(columns=weights.index)
    present = table.notna()
    w = present.mul(weights, axis=1)
    totals = w.sum(axis=1)
    weighted = table.fillna(0.0).mul(weights, axis=1).sum(axis=1)
    result = (weighted / totals).where(totals > 0)
    result.name = "premium"
    return result


def annualized_premia(outcomes, scheme: str = "frequentist", reading: str = "repaired",
                      value: str = "gamma") -> pd.DataFrame:
    """Calendar-year premia: mean of the weighted monthly premium plus the path IQR

    Columns: year, premium, q25, q75, n_months, n_paths.
    """
    monthly = weighted_premium_series(outcomes, scheme, reading, value).dropna()
    table = _premium_table(outcomes.series, value)
    ok = outcomes.frame.loc[outcomes.frame["status"] == "ok", "path_index"].to_numpy()
    table = table.reindex(columns=ok)
    per_path = table.groupby(table.index.year).mean()
    yearly = monthly.groupby(monthly.index.year).agg(["mean", "size"])
    frame = pd.DataFrame({
        "year": yearly.index.astype(int),
        "premium": yearly["mean"].to_numpy(),
        "q25": per_path.reindex(yearly.index).quantile(0.25, axis=1).to_numpy(),
        "q75": per_path.reindex(yearly.index).quantile(0.75, axis=1).to_numpy(),
        "n_months": yearly["size"].to_numpy(dtype=int),
        "n_paths": per_path.reindex(yearly.index).notna().sum(axis=1).to_numpy(dtype=int),
    })
    return frame.reset_index(drop=True)


def option_impact_tables(outcomes, layers: Optional[Sequence[str]] = None, weights: str = "uniform",
                         column: str = "b") -> pd.DataFrame:
    """Pairwise conditional tests over the options of every listed layer, stacked."""
    names = list(outcomes.spec.names) if layers is None else list(layers)
    if not names:
        raise DomainError("No layers to tabulate")
    pieces = [layer_impact_table(outcomes, layer, weights, column) for layer in names]
    filled = [piece for piece in pieces if not piece.empty]
    return pd.concat(filled, ignore_index=True) if filled else pieces[0]


def comparator_etc(outcomes, comparators: Optional[Dict[str, float]] = None, q: float = 0.9,
                   fit: str = "gaussian", nu: float = 3.0, column: str = "b") -> pd.DataFrame:
    """EtC of each published premium against the path cloud of average premia."""
    if comparators is None:
        comparators = {"longest_sample": MARKET_PREMIUM_LONGEST_SAMPLE}
        comparators.update({f"prior_{i + 1}": v for i, v in enumerate(MARKET_PREMIUM_COMPARATORS)})
    values = outcomes.ok().values(column)
    rows = []
    for name, bstar in comparators.items():
        report = etc_score(values, bstar, q=q, fit=fit, nu=nu)
        row = {"comparator": name}
        row.update(report.to_dict())
        rows.append(row)
    return pd.DataFrame(rows)


def fama_macbeth_tstat(gammas) -> float:
    """Time-series t-statistic of a premium series: mean / (sd / sqrt(T))."""
    values = np.asarray(gammas, dtype=float)
    values = values[np.isfinite(values)]
    if values.size < 2:
        return float("nan")
    sd = values.std(ddof=1)
    return float(values.mean() / (sd / np.sqrt(values.size))) if sd > 0 else float("nan")
