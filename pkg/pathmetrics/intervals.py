"""
Hacking intervals: ranges of outcomes over the paths left free once K
layers are fixed, their average (ARI) and its growth with the number of
free layers.
"""

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from utils.errors import DomainError, SchemaError


@dataclass
class IntervalSlice:
    """All hacking intervals for one number of fixed layers K.

    ``ranges`` has one row per (fixed-layer combination, fixed options)
    with columns fixed_layers, configuration, n_paths, low, high, range.
    """

    n_fixed: int
    n_free: int
    ranges: pd.DataFrame

    @property
    def ari(self) -> float:
        return float(self.ranges["range"].mean()) if len(self.ranges) else float("nan")

    @property
    def n_intervals(self) -> int:
        return len(self.ranges)


@dataclass
class HackingIntervalReport:
    slices: Dict[int, IntervalSlice]
    n_layers: int
    n_excluded: int
    power_law: Optional[Tuple[float, float]] = None
    fit_method: str = "log_least_squares"
    extra: Dict[str, Any] = field(default_factory=dict)

    def ari_by_free(self) -> pd.Series:
        """ARI indexed by the number of free layers J - K, ascending."""
        values = {s.n_free: s.ari for s in self.slices.values()}
        return pd.Series(values, dtype=float).sort_index()

    def growth_rates(self) -> pd.Series:
        return growth_rates(self.ari_by_free())

    def summary_frame(self) -> pd.DataFrame:
        ari = self.ari_by_free()
        counts = pd.Series({s.n_free: s.n_intervals for s in self.slices.values()}).sort_index()
        return pd.DataFrame({"n_free": ari.index, "n_intervals": counts.to_numpy(),
                             "ari": ari.to_numpy(), "rate": growth_rates(ari).to_numpy()})

    def ranges_frame(self) -> pd.DataFrame:
        parts = []
        for s in self.slices.values():
            part = s.ranges.copy()
            part.insert(0, "n_free", s.n_free)
            parts.append(part)
        return pd.concat(parts, ignore_index=True) if parts else pd.DataFrame()

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            "n_layers": self.n_layers,
            "excluded_paths": self.n_excluded,
            "summary": self.summary_frame().to_dict(orient="records"),
            "fit_method": self.fit_method,
            **self.extra,
        }
        if self.power_law is not None:
            payload["power_law"] = {"a": self.power_law[0], "b": self.power_law[1]}
        return payload


def _prepare(outcomes, column: str, layers: Optional[Sequence[str]]):
    frame = getattr(outcomes, "frame", outcomes)
    if layers is None:
        spec = getattr(outcomes, "spec", None)
        if spec is None:
            raise DomainError("Layer names are required when outcomes carry no study spec")
        layers = list(spec.names)
    missing = [c for c in list(layers) + [column] if c not in frame.columns]
    if missing:
        raise SchemaError(f"Outcome table misses column(s) {missing}")
    usable = frame[column].notna()
    if "status" in frame.columns:
        usable &= frame["status"] == "ok"
    return frame.loc[usable, list(layers) + [column]], list(layers), int((~usable).sum())


def hacking_intervals(outcomes, n_fixed: int, column: str = "b",
                      layers: Optional[Sequence[str]] = None) -> IntervalSlice:
    """Ranges max - min over every set of paths sharing K fixed layer options

    Paths without an ok status are excluded from the ranges.
    """
    frame, layers, _ = _prepare(outcomes, column, layers)
    n_layers = len(layers)
    if not 1 <= n_fixed <= n_layers - 1:
        raise DomainError(f"K must lie in [1, {n_layers - 1}], got {n_fixed}")
    parts = []
    for fixed in itertools.combinations(layers, n_fixed):
        grouped = frame.groupby(list(fixed), sort=True, observed=True)[column].agg(["size", "min", "max"])
        keys = grouped.index.to_flat_index()
        parts.append(pd.DataFrame({
            "fixed_layers": ",".join(fixed),
            "configuration": [",".join(map(str, k if isinstance(k, tuple) else (k,))) for k in keys],
            "n_paths": grouped["size"].to_numpy(),
            "low": grouped["min"].to_numpy(),
            "high": grouped["max"].to_numpy(),
        }))
    ranges = pd.concat(parts, ignore_index=True)
    ranges["range"] = ranges["high"] - ranges["low"]
    return IntervalSlice(n_fixed, n_layers - n_fixed, ranges)


def growth_rates(ari_by_free: pd.Series) -> pd.Series:
    """rho_m = ARI(m) / ARI(m - 1) - 1, undefined for the smallest m."""
    ari = ari_by_free.sort_index()
    return ari / ari.shift(1) - 1.0


def fit_power_law(ari_by_free) -> Tuple[float, float]:
    """(a, b) minimizing squared error of log ARI = log a + n log b

    Accepts a Series indexed by free-layer count or a plain sequence read
    as n = 1, 2, ...
    """
    if isinstance(ari_by_free, pd.Series):
        n = ari_by_free.index.to_numpy(dtype=float)
        values = ari_by_free.to_numpy(dtype=float)
    else:
        values = np.asarray(ari_by_free, dtype=float)
        n = np.arange(1, values.size + 1, dtype=float)
    if values.size < 2:
        raise DomainError("A power-law fit needs at least two points")
    if not (values > 0).all():
        raise DomainError("ARI values must be positive for a log fit")
    slope, intercept = np.polyfit(n, np.log(values), 1)
    return float(np.exp(intercept)), float(np.exp(slope))


def hacking_interval_report(outcomes, column: str = "b", layers: Optional[Sequence[str]] = None,
                            k_min: int = 1, k_max: Optional[int] = None) -> HackingIntervalReport:
    """Interval slices for K = k_min .. k_max with growth rates and a power-law fit."""
    _, layers, n_excluded = _prepare(outcomes, column, layers)
    k_max = len(layers) - 1 if k_max is None else k_max
    if k_min > k_max:
        raise DomainError(f"Empty K range [{k_min}, {k_max}]")
    slices = {k: hacking_intervals(outcomes, k, column, layers) for k in range(k_min, k_max + 1)}
    report = HackingIntervalReport(slices, len(layers), n_excluded)
    ari = report.ari_by_free()
    if len(ari) >= 2 and (ari > 0).all():
        report.power_law = fit_power_law(ari)
    return report
