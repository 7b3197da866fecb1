"""
Shared fixtures: synthetic data files, small study configs and an
isolated environment for every test.
"""

import os
import sys
import json
import tempfile

import numpy as np
import pandas as pd
import pytest

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

CONFIG_DIR = os.path.join(PROJECT_ROOT, "config")

FACTOR_NAMES = ["MKT", "SMB", "HML", "RMW", "CMA"]


def pytest_configure(config):
    # Module-level loggers are created while tests are collected
    os.environ.setdefault("FORKPATHS_LOG_DIR", tempfile.mkdtemp(prefix="forkpaths-logs-"))


@pytest.fixture(autouse=True)
def isolated_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("FORKPATHS_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("FORKPATHS_CACHE_DIR", str(tmp_path / "cache"))
    for name in ("FORKPATHS_JOBS", "FORKPATHS_SEED", "FORKPATHS_OUT", "FORKPATHS_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
    return str(path)


def month_ends(start: str, periods: int) -> pd.DatetimeIndex:
    return pd.period_range(start, periods=periods, freq="M").to_timestamp(how="end").normalize()


# ---------------------------------------------------------------- data

@pytest.fixture
def make_macro_frame():
    """Goyal-Welch style monthly file; the premium loads on lagged payout."""

    def build(n_months: int = 240, seed: int = 0) -> pd.DataFrame:
        rng = np.random.default_rng(seed)
        periods = pd.period_range("1980-01", periods=n_months, freq="M")
        d12 = 1.0 + 0.2 * rng.random(n_months)
        e12 = 2.0 + 0.5 * rng.random(n_months)
        payout = np.log(d12) - np.log(e12)
        rfree = 0.003 + 0.001 * rng.random(n_months)
        noise = rng.normal(scale=0.03, size=n_months)
        market = rfree + 0.006 + noise
        market[1:] += 0.05 * (payout[:-1] - payout.mean())
        frame = pd.DataFrame({
            "yyyymm": [int(f"{p.year}{p.month:02d}") for p in periods],
            "Index": 100.0 * np.cumprod(1.0 + market),
            "D12": d12,
            "E12": e12,
            "b/m": 0.5 + 0.1 * rng.standard_normal(n_months),
            "svar": 0.002 + 0.001 * rng.random(n_months),
            "corpr": 0.006 + 0.02 * rng.standard_normal(n_months),
            "ltr": 0.005 + 0.02 * rng.standard_normal(n_months),
            "AAA": 0.06 + 0.01 * rng.random(n_months),
            "BAA": 0.075 + 0.01 * rng.random(n_months),
            "ntis": 0.01 * rng.standard_normal(n_months),
            "Rfree": rfree,
            "CRSP_SPvw": market,
        })
        frame.loc[frame.index.isin([50, 51, 120]), "b/m"] = np.nan
        frame.loc[:5, "ntis"] = np.nan
        return frame

    return build


@pytest.fixture
def macro_csv(tmp_path, make_macro_frame):
    path = tmp_path / "goyal_welch.csv"
    make_macro_frame().to_csv(path, index=False)
    return str(path)


@pytest.fixture
def make_characteristics_frame():
    """Long stock panel; returns load positively on mom and negatively on value."""

    def build(n_stocks: int = 20, n_months: int = 90, seed: int = 0) -> pd.DataFrame:
        rng = np.random.default_rng(seed)
        dates = month_ends("2000-01", n_months)
        permnos = 10001 + np.arange(n_stocks)
        mom = rng.standard_normal((n_months, n_stocks))
        value = rng.standard_normal((n_months, n_stocks))
        size = rng.standard_normal((n_months, n_stocks))
        ret = 0.005 + 0.01 * mom - 0.008 * value + 0.03 * rng.standard_normal((n_months, n_stocks))
        frame = pd.DataFrame({
            "permno": np.tile(permnos, n_months),
            "date": np.repeat(dates, n_stocks),
            "mom": mom.ravel(),
            "value": value.ravel(),
            "size": size.ravel(),
            "ret": ret.ravel(),
            "mvel1": np.exp(rng.normal(5.0, 1.0, n_months * n_stocks)),
            "retvol": 0.02 + 0.05 * rng.random(n_months * n_stocks),
        })
        frame.loc[(frame["permno"] == 10005) & (frame["date"] == dates[10]), "mom"] = np.nan
        return frame

    return build


@pytest.fixture
def characteristics_csv(tmp_path, make_characteristics_frame):
    frame = make_characteristics_frame()
    frame["date"] = frame["date"].dt.strftime("%Y%m").astype(int)
    path = tmp_path / "characteristics.csv"
    frame.to_csv(path, index=False)
    return str(path)


@pytest.fixture
def fmb_files(tmp_path):
    """Monthly and daily factor and portfolio files in percent (Ken-French layout)."""
    rng = np.random.default_rng(7)
    months = pd.period_range("2010-01", periods=60, freq="M")
    days = pd.bdate_range("2010-01-01", "2014-12-31")
    betas = {key: 0.5 + rng.random((10, len(FACTOR_NAMES))) for key in ("p_ew", "p_vw")}

    def factor_table(n, mean, sd):
        values = mean + sd * rng.standard_normal((n, len(FACTOR_NAMES)))
        table = pd.DataFrame(values, columns=FACTOR_NAMES)
        table["RF"] = 0.01 if sd > 2 else 0.001
        return table

    monthly = factor_table(len(months), 0.5, 4.0)
    daily = factor_table(len(days), 0.02, 1.0)
    monthly_dates = [int(f"{p.year}{p.month:02d}") for p in months]
    daily_dates = [int(d.strftime("%Y%m%d")) for d in days]

    paths = {}
    for name, table, dates in (("factors", monthly, monthly_dates), ("factors_daily", daily, daily_dates)):
        out = table.copy()
        out.insert(0, "date", dates)
        out = out.rename(columns={"MKT": "Mkt-RF"})
        paths[name] = str(tmp_path / f"{name}.csv")
        out.to_csv(paths[name], index=False)

    for key, loading in betas.items():
        for suffix, table, dates, noise in (("", monthly, monthly_dates, 1.0), ("_daily", daily, daily_dates, 0.3)):
            values = (table["RF"].to_numpy()[:, None] + table[FACTOR_NAMES].to_numpy() @ loading.T
                      + noise * rng.standard_normal((len(table), 10)))
            out = pd.DataFrame(values, columns=[f"P{i + 1}" for i in range(10)])
            out.insert(0, "date", dates)
            paths[key + suffix] = str(tmp_path / f"{key}{suffix}.csv")
            out.to_csv(paths[key + suffix], index=False)
    return paths


# ---------------------------------------------------------------- configs

SMALL_PREMIUM_CONFIG = {
    "study_id": "premium_small",
    "kind": "premium",
    "layers": [
        {"name": "frequency", "options": ["monthly", "quarterly"]},
        {"name": "missing", "options": ["remove", "impute"]},
        {"name": "winsorization", "options": [{"id": "w0", "payload": 0.0}, {"id": "w2", "payload": 0.02}]},
        {"name": "transform", "options": ["level", "diff"]},
        {"name": "predictor", "options": ["payout", "bm"]},
        {"name": "horizon", "options": [{"id": "h1", "payload": 1}, {"id": "h3", "payload": 3}]},
        {"name": "start", "options": ["first", "middle"]},
        {"name": "end", "options": ["end", "middle"]},
        {"name": "estimator", "options": ["ols_hac", "aug_iid"]},
        {"name": "post_treatment", "options": ["none", "adjusted"]},
    ],
    "constraints": [{"when": {"start": ["middle"], "end": ["middle"]}, "description": "empty subsample"}],
    "default_path": {
        "frequency": "monthly", "missing": "impute", "winsorization": "w0", "transform": "level",
        "predictor": "payout", "horizon": "h1", "start": "first", "end": "end",
        "estimator": "ols_hac", "post_treatment": "none",
    },
    "settings": {"min_observations": 30, "hac_lag": "auto", "amihud_correction": True},
}

SMALL_ANOMALIES_CONFIG = {
    "study_id": "anomalies_small",
    "kind": "anomalies",
    "layers": [
        {"name": "cleaning", "options": ["impute", "remove"]},
        {"name": "holding", "options": [{"id": "1", "payload": 1}, {"id": "2", "payload": 2}]},
        {"name": "window", "options": [
            {"id": "full", "payload": [0.0, 1.0]},
            {"id": "first_half", "payload": [0.0, 0.5]},
            {"id": "second_half", "payload": [0.5, 1.0]},
        ]},
        {"name": "q", "options": [{"id": "0.1", "payload": 0.1}, {"id": "0.2", "payload": 0.2}]},
        {"name": "weighting", "options": ["EW", "VW"]},
    ],
    "default_path": {"cleaning": "impute", "holding": "1", "window": "full", "q": "0.2", "weighting": "EW"},
    "settings": {"store_series": "default"},
}

SMALL_FMB_CONFIG = {
    "study_id": "fmb_small",
    "kind": "fmb",
    "layers": [
        {"name": "factor", "options": ["MKT", "SMB"]},
        {"name": "assets", "options": ["p_ew", "p_vw"]},
        {"name": "frequency", "options": ["monthly", "daily"]},
        {"name": "pre_winsor", "options": [{"id": "0", "payload": 0.0}, {"id": "0.05", "payload": 0.05}]},
        {"name": "regression", "options": ["full", "rolling_short"]},
        {"name": "post_winsor", "options": [{"id": "0", "payload": 0.0}, {"id": "0.1", "payload": 0.1}]},
    ],
    "default_path": {"assets": "p_vw", "frequency": "monthly", "pre_winsor": "0", "regression": "full",
                     "post_winsor": "0"},
    "settings": {"min_months": 24, "percent_returns": True},
}


@pytest.fixture
def small_premium_config(tmp_path):
    return write_json(tmp_path / "premium_small.json", SMALL_PREMIUM_CONFIG)


@pytest.fixture
def small_anomalies_config(tmp_path):
    return write_json(tmp_path / "anomalies_small.json", SMALL_ANOMALIES_CONFIG)


@pytest.fixture
def small_fmb_config(tmp_path):
    return write_json(tmp_path / "fmb_small.json", SMALL_FMB_CONFIG)


@pytest.fixture
def config_path():
    def resolve(name: str) -> str:
        return os.path.join(CONFIG_DIR, name)

    return resolve
