"""
Characteristic-sorted long-short portfolios.

The stock panel is long format (permno, date, characteristic columns, ret,
optional mvel1 / retvol), where ``ret`` is the return over the month that
follows ``date``. A stock is long when rank/N > 1 - q and short when
rank/N <= q; ranks are 1..N with ties broken by permno.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from utils.errors import DomainError, EmptyLegError, InsufficientWindowError, ThinCrossSectionError

WEIGHTINGS = ("EW", "VW", "IVW", "CW")
CLEANINGS = ("impute", "remove")
MIN_STOCKS = 10
MIN_MONTHS = 24


@dataclass(frozen=True)
class SortConfig:
    characteristic: str
    q: float = 0.2
    holding: int = 1
    weighting: str = "EW"
    cleaning: str = "impute"
    start: Optional[pd.Timestamp] = None
    end: Optional[pd.Timestamp] = None

    def __post_init__(self):
        if not 0 < self.q < 0.5:
            raise DomainError(f"Quantile threshold must lie in (0, 0.5), got {self.q}")
        if self.holding not in (1, 2, 3):
            raise DomainError(f"Holding period must be 1, 2 or 3 months, got {self.holding}")
        if self.weighting not in WEIGHTINGS:
            raise DomainError(f"Unknown weighting '{self.weighting}', expected one of {WEIGHTINGS}")
        if self.cleaning not in CLEANINGS:
            raise DomainError(f"Unknown cleaning '{self.cleaning}', expected one of {CLEANINGS}")


@dataclass
class LongShortSeries:
    returns: pd.Series
    long_counts: pd.Series
    short_counts: pd.Series

    def __len__(self) -> int:
        return len(self.returns)


@dataclass
class CrossSection:
    permnos: np.ndarray
    values: np.ndarray
    mvel1: Optional[np.ndarray] = None
    retvol: Optional[np.ndarray] = None


@dataclass
class PreparedSorts:
    """Cleaned cross sections per formation date plus the return matrix."""

    characteristic: str
    cleaning: str
    dates: pd.DatetimeIndex
    cross_sections: Dict[pd.Timestamp, CrossSection]
    returns: np.ndarray
    columns: Dict[int, int] = field(default_factory=dict)


def clean_characteristic(panel: pd.DataFrame, characteristic: str, cleaning: str) -> pd.DataFrame:
    """Impute (carry forward per stock) or remove missing characteristic values."""
    if characteristic not in panel.columns:
        raise DomainError(f"Panel has no characteristic '{characteristic}'")
    frame = panel.sort_values(["permno", "date"], kind="stable")
    if cleaning == "impute":
        frame = frame.assign(**{characteristic: frame.groupby("permno")[characteristic].ffill()})
        frame = frame[frame[characteristic].notna()]
    elif cleaning == "remove":
        frame = frame[frame[characteristic].notna() & frame["ret"].notna()]
    else:
        raise DomainError(f"Unknown cleaning '{cleaning}'")
    return frame.sort_values(["date", "permno"], kind="stable")


def prepare_sorts(panel: pd.DataFrame, characteristic: str, cleaning: str) -> PreparedSorts:
    cleaned = clean_characteristic(panel, characteristic, cleaning)
    wide = panel.pivot_table(index="date", columns="permno", values="ret", aggfunc="last", dropna=False)
    dates = pd.DatetimeIndex(sorted(panel["date"].unique()))
    wide = wide.reindex(index=dates)
    columns = {int(p): i for i, p in enumerate(wide.columns)}
    cross_sections = {}
    for date, group in cleaned.groupby("date", sort=True):
        cross_sections[pd.Timestamp(date)] = CrossSection(
            permnos=group["permno"].to_numpy(dtype=np.int64),
            values=group[characteristic].to_numpy(dtype=float),
            mvel1=group["mvel1"].to_numpy(dtype=float) if "mvel1" in group else None,
            retvol=group["retvol"].to_numpy(dtype=float) if "retvol" in group else None,
        )
    return PreparedSorts(characteristic, cleaning, dates, cross_sections, wide.to_numpy(dtype=float), columns)


def _ranks(values: np.ndarray, permnos: np.ndarray) -> np.ndarray:
    order = np.lexsort((permnos, values))
    ranks = np.empty(values.size, dtype=np.int64)
    ranks[order] = np.arange(1, values.size + 1)
    return ranks


def _normalize(weights: np.ndarray, leg: str) -> np.ndarray:
    usable = np.isfinite(weights) & (weights > 0)
    weights = np.where(usable, weights, 0.0)
    total = weights.sum()
    if not total > 0:
        raise EmptyLegError(f"{leg} leg has no usable weights")
    return weights / total


def _leg_weights(section: CrossSection, members: np.ndarray, scheme: str, leg: str,
                 scores: Optional[np.ndarray] = None) -> pd.Series:
    if not members.any():
        raise EmptyLegError(f"{leg} leg is empty")
    if scheme == "EW":
        raw = np.ones(members.sum())
    elif scheme == "VW":
        if section.mvel1 is None:
            raise DomainError("Value weighting needs an 'mvel1' column")
        raw = section.mvel1[members]
    elif scheme == "IVW":
        if section.retvol is None:
            raise DomainError("Inverse-volatility weighting needs a 'retvol' column")
        with np.errstate(divide="ignore"):
            raw = 1.0 / section.retvol[members]
    else:
        raw = np.abs(scores[members])
    return pd.Series(_normalize(raw, leg), index=section.permnos[members], name=leg)


def form_from_section(section: CrossSection, config: SortConfig) -> Tuple[pd.Series, pd.Series]:
    valid = np.isfinite(section.values)
    section = CrossSection(
        section.permnos[valid], section.values[valid],
        None if section.mvel1 is None else section.mvel1[valid],
        None if section.retvol is None else section.retvol[valid],
    )
    n = section.values.size
    if n < MIN_STOCKS:
        raise ThinCrossSectionError(f"Only {n} stocks with a defined '{config.characteristic}'")
    ranks = _ranks(section.values, section.permnos)
    if config.weighting == "CW":
        # legs split at the median rank; weights follow the characteristic's distance to the median
        centered = ranks - (n + 1) / 2.0
        scores = section.values - np.median(section.values)
        long = _leg_weights(section, centered > 0, "CW", "long", scores)
        short = _leg_weights(section, centered < 0, "CW", "short", scores)
        return long, short
    q = Fraction(config.q).limit_denominator(10 ** 6)
    long_members = ranks * q.denominator > (q.denominator - q.numerator) * n
    short_members = ranks * q.denominator <= q.numerator * n
    long = _leg_weights(section, long_members, config.weighting, "long")
    short = _leg_weights(section, short_members, config.weighting, "short")
    return long, short


def form_portfolio(panel: pd.DataFrame, config: SortConfig, date) -> Tuple[pd.Series, pd.Series]:
    """Long and short weights (indexed by permno) at one formation date

    The panel is expected to be cleaned already (see ``clean_characteristic``).
    """
    date = pd.Timestamp(date)
    rows = panel[panel["date"] == date]
    section = CrossSection(
        permnos=rows["permno"].to_numpy(dtype=np.int64),
        values=rows[config.characteristic].to_numpy(dtype=float),
        mvel1=rows["mvel1"].to_numpy(dtype=float) if "mvel1" in rows else None,
        retvol=rows["retvol"].to_numpy(dtype=float) if "retvol" in rows else None,
    )
    return form_from_section(section, config)


def _leg_return(prepared: PreparedSorts, weights: pd.Series, rows: slice) -> np.ndarray:
    columns = [prepared.columns[int(p)] for p in weights.index]
    block = prepared.returns[rows][:, columns]
    w = weights.to_numpy()
    available = np.isfinite(block)
    covered = (available * w).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(covered > 0, np.where(available, block, 0.0) @ w / covered, np.nan)


def longshort_from_prepared(prepared: PreparedSorts, config: SortConfig) -> LongShortSeries:
    dates = prepared.dates
    start = 0 if config.start is None else int(dates.searchsorted(pd.Timestamp(config.start), side="left"))
    end = len(dates) if config.end is None else int(dates.searchsorted(pd.Timestamp(config.end), side="left"))
    if end - start < MIN_MONTHS:
        raise InsufficientWindowError(f"Window holds {max(end - start, 0)} months, need {MIN_MONTHS}")

    values, labels, long_counts, short_counts, formation_dates = [], [], [], [], []
    for first in range(start, end, config.holding):
        last = min(first + config.holding, end)
        section = prepared.cross_sections.get(dates[first])
        if section is None:
            raise ThinCrossSectionError(f"No stocks with a defined '{config.characteristic}' on {dates[first].date()}")
        long, short = form_from_section(section, config)
        spread = _leg_return(prepared, long, slice(first, last)) - _leg_return(prepared, short, slice(first, last))
        values.extend(spread)
        labels.extend(dates[first:last])
        formation_dates.append(dates[first])
        long_counts.append(int((long > 0).sum()))
        short_counts.append(int((short > 0).sum()))

    returns = pd.Series(values, index=pd.DatetimeIndex(labels), name="longshort").dropna()
    if len(returns) < MIN_MONTHS:
        raise InsufficientWindowError(f"Only {len(returns)} monthly returns, need {MIN_MONTHS}")
    index = pd.DatetimeIndex(formation_dates)
    return LongShortSeries(returns, pd.Series(long_counts, index=index), pd.Series(short_counts, index=index))


def longshort_returns(panel: pd.DataFrame, config: SortConfig) -> LongShortSeries:
    """Monthly long-minus-short returns with single-cohort holding periods."""
    return longshort_from_prepared(prepare_sorts(panel, config.characteristic, config.cleaning), config)


def sharpe_tstat(series) -> float:
    """sqrt(T) * mean / sd with the sample (n - 1) standard deviation."""
    values = np.asarray(series, dtype=float)
    if values.size < MIN_MONTHS:
        raise InsufficientWindowError(f"Need at least {MIN_MONTHS} returns, got {values.size}")
    sd = values.std(ddof=1)
    if not sd > 0:
        raise DomainError("Return series has zero standard deviation")
    return float(np.sqrt(values.size) * values.mean() / sd)
