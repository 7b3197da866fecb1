"""
CSV ingestion for the public data layouts the studies consume.

Column dictionaries
-------------------
Goyal-Welch macro file (one row per period; date as yyyymm, yyyyq or yyyy):
    Index       S&P 500 index level
    D12, E12    trailing 12-month dividends and earnings
    b/m         book-to-market of the Dow Jones index
    svar        stock variance (sum of squared daily returns)
    corpr, ltr  long-term corporate bond and government bond returns
    AAA, BAA    corporate bond yields by rating
    ntis        net equity expansion
    Rfree       risk-free rate
    CRSP_SPvw   value-weighted market return including dividends (optional
                when Index and D12 are present)

Characteristics panel (long format, one row per stock-month):
    permno      stock identifier
    date        formation month
    ret         return over the month following ``date``
    mvel1       market capitalization (value weights, optional)
    retvol      return volatility (inverse-volatility weights, optional)
    <other>     one column per sorting characteristic

Factor file: date, MKT (or Mkt-RF), SMB, HML, RMW, CMA, RF.
Portfolio files: date + one column per portfolio (Ken-French layout).
Stock-returns file: long (permno, date, ret) or wide (date + one column per stock).
"""

import re
from pathlib import Path
from typing import Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from datapanel.panel import DataPanel
from utils.errors import IngestionError

NA_VALUES = ["", "NA", "NaN", "nan"]
KEN_FRENCH_MISSING = (-99.99, -999.0)

GOYAL_WELCH_REQUIRED = ["D12", "E12", "b/m", "svar", "corpr", "ltr", "AAA", "BAA", "ntis", "Rfree"]
GOYAL_WELCH_PREDICTORS = ["payout", "bm", "svar", "dfr", "dfy", "ntis"]
CHARACTERISTICS_REQUIRED = ["permno", "date", "ret"]
FACTOR_COLUMNS = ["MKT", "SMB", "HML", "RMW", "CMA"]

# How monthly columns aggregate to coarser periods; anything else keeps the period's last value
AGGREGATION = {"market": "compound", "rfree": "compound", "svar": "sum"}

PathLike = Union[str, Path]


def _read_csv(path: PathLike, **kwargs) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"Data file not found: {path}")
    try:
        return pd.read_csv(path, na_values=NA_VALUES, keep_default_na=False, thousands=",", **kwargs)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise IngestionError(f"Could not parse {path}: {str(e)}") from e


def _require(frame: pd.DataFrame, columns: Iterable[str], source: PathLike) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise IngestionError(f"{source}: missing required column(s) {missing}")


def infer_frequency(values: pd.Series) -> str:
    sample = str(values.dropna().iloc[0]).strip()
    if re.fullmatch(r"\d{8}", sample):
        return "daily"
    if re.fullmatch(r"\d{6}", sample):
        return "monthly"
    if re.fullmatch(r"\d{5}", sample):
        return "quarterly"
    if re.fullmatch(r"\d{4}", sample):
        return "annual"
    return "daily"


def parse_dates(values: pd.Series) -> pd.DatetimeIndex:
    """Parse yyyymmdd, yyyymm, yyyyq, yyyy or ISO dates; periods map to their last day."""
    text = values.astype(str).str.strip().str.replace(r"\.0$", "", regex=True)
    kind = infer_frequency(text)
    try:
        if re.fullmatch(r"\d{8}", text.iloc[0]):
            return pd.DatetimeIndex(pd.to_datetime(text, format="%Y%m%d"))
        if kind == "monthly":
            return pd.DatetimeIndex(pd.to_datetime(text, format="%Y%m") + pd.offsets.MonthEnd(0))
        if kind == "quarterly":
            periods = pd.PeriodIndex([f"{t[:4]}Q{t[4]}" for t in text], freq="Q")
            return periods.to_timestamp(how="end").normalize()
        if kind == "annual":
            return pd.DatetimeIndex(pd.to_datetime(text, format="%Y") + pd.offsets.YearEnd(0))
        return pd.DatetimeIndex(pd.to_datetime(text))
    except (ValueError, TypeError) as e:
        raise IngestionError(f"Unparseable date values: {str(e)}") from e


def read_goyal_welch(path: PathLike, date_column: str = "yyyymm", frequency: Optional[str] = None) -> DataPanel:
    """Macro predictor file -> panel with premium and the six study predictors."""
    frame = _read_csv(path)
    _require(frame, [date_column] + GOYAL_WELCH_REQUIRED, path)
    if "CRSP_SPvw" not in frame.columns and "Index" not in frame.columns:
        raise IngestionError(f"{path}: need either 'CRSP_SPvw' or 'Index' to build market returns")
    dates = parse_dates(frame[date_column])
    frequency = frequency or infer_frequency(frame[date_column].astype(str))

    if "CRSP_SPvw" in frame.columns:
        market = frame["CRSP_SPvw"].astype(float)
    else:
        index = frame["Index"].astype(float)
        periods = {"monthly": 12, "quarterly": 4, "annual": 1}.get(frequency, 12)
        market = (index + frame["D12"].astype(float) / periods) / index.shift(1) - 1.0

    columns = {
        "market": market.to_numpy(),
        "rfree": frame["Rfree"].astype(float).to_numpy(),
        "payout": (np.log(frame["D12"].astype(float)) - np.log(frame["E12"].astype(float))).to_numpy(),
        "bm": frame["b/m"].astype(float).to_numpy(),
        "svar": frame["svar"].astype(float).to_numpy(),
        "dfr": (frame["corpr"].astype(float) - frame["ltr"].astype(float)).to_numpy(),
        "dfy": (frame["BAA"].astype(float) - frame["AAA"].astype(float)).to_numpy(),
        "ntis": frame["ntis"].astype(float).to_numpy(),
    }
    panel_frame = pd.DataFrame(columns, index=dates)
    panel_frame["premium"] = panel_frame["market"] - panel_frame["rfree"]
    return DataPanel(panel_frame, frequency)


def to_frequency(panel: DataPanel, frequency: str) -> DataPanel:
    """Aggregate a monthly macro panel to quarterly or annual periods."""
    if frequency == panel.frequency:
        return panel
    if panel.frequency != "monthly" or frequency not in ("quarterly", "annual"):
        raise IngestionError(f"Cannot aggregate a {panel.frequency} panel to {frequency}")
    frame = panel.to_frame()
    grouper = frame.index.to_period("Q" if frequency == "quarterly" else "Y")
    pieces = {}
    for column in frame.columns:
        grouped = frame[column].groupby(grouper)
        rule = AGGREGATION.get(column, "last")
        if rule == "compound":
            pieces[column] = grouped.apply(lambda s: np.prod(1.0 + s.to_numpy()) - 1.0)
        elif rule == "sum":
            pieces[column] = grouped.sum(min_count=1)
        else:
            pieces[column] = grouped.last()
    aggregated = pd.DataFrame(pieces)
    aggregated.index = aggregated.index.to_timestamp(how="end").normalize()
    if "market" in aggregated and "rfree" in aggregated:
        aggregated["premium"] = aggregated["market"] - aggregated["rfree"]
    return DataPanel(aggregated, frequency)


def read_characteristics_panel(path: PathLike, characteristics: Optional[List[str]] = None) -> pd.DataFrame:
    """Long-format stock panel sorted by (date, permno)."""
    frame = _read_csv(path)
    _require(frame, CHARACTERISTICS_REQUIRED + list(characteristics or []), path)
    frame["date"] = parse_dates(frame["date"])
    frame["permno"] = frame["permno"].astype(np.int64)
    return frame.sort_values(["date", "permno"], kind="stable").reset_index(drop=True)


def _read_wide_returns(path: PathLike, percent: bool, date_column: str) -> pd.DataFrame:
    frame = _read_csv(path)
    if date_column not in frame.columns:
        date_column = frame.columns[0]
    dates = parse_dates(frame[date_column])
    values = frame.drop(columns=[date_column]).astype(float)
    values = values.mask(values.isin(KEN_FRENCH_MISSING))
    if percent:
        values = values / 100.0
    values.index = dates
    values.index.name = "date"
    return values


def read_factor_returns(path: PathLike, percent: bool = True, date_column: str = "date") -> pd.DataFrame:
    """Factor file -> dates x factors (decimal returns), market as MKT."""
    frame = _read_wide_returns(path, percent, date_column)
    frame = frame.rename(columns={"Mkt-RF": "MKT", "Mkt_RF": "MKT"})
    _require(frame, FACTOR_COLUMNS, path)
    return frame


def read_portfolio_returns(path: PathLike, percent: bool = True, date_column: str = "date") -> pd.DataFrame:
    """Ken-French portfolio file -> dates x portfolios (decimal returns)."""
    frame = _read_wide_returns(path, percent, date_column)
    if frame.shape[1] == 0:
        raise IngestionError(f"{path}: no portfolio columns")
    return frame


def read_stock_returns(path: PathLike, percent: bool = False) -> pd.DataFrame:
    """Stock returns (long or wide) -> dates x stocks."""
    frame = _read_csv(path)
    if {"permno", "date", "ret"}.issubset(frame.columns):
        frame["date"] = parse_dates(frame["date"])
        wide = frame.pivot_table(index="date", columns="permno", values="ret", aggfunc="last")
        wide.columns = [str(c) for c in wide.columns]
        wide = wide.astype(float)
        return wide / 100.0 if percent else wide
    return _read_wide_returns(path, percent, "date")
