import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from fmb.summary import (
    MARKET_PREMIUM_LONGEST_SAMPLE,
    annualized_premia,
    comparator_etc,
    fama_macbeth_tstat,
    path_weights,
    weighted_premium_series,
)
from fmb.two_pass import FirstPassLoadings, first_pass, second_pass
from pathgrid.grid import LayerSpec, StudySpec
from studies.outcomes import OutcomeSet
from utils.errors import DomainError

FACTORS = ["MKT", "SMB"]


def month_ends(periods, start="2000-01"):
    return pd.period_range(start, periods=periods, freq="M").to_timestamp(how="end").normalize()


def factor_frame(n=120, seed=0):
    rng = np.random.default_rng(seed)
    return pd.DataFrame(rng.normal(0.005, 0.04, (n, 2)), index=month_ends(n), columns=FACTORS)


def loading_frame(n_assets=12, seed=1):
    rng = np.random.default_rng(seed)
    return pd.DataFrame(rng.uniform(0.2, 1.8, (n_assets, 2)), index=[f"P{i}" for i in range(n_assets)],
                        columns=FACTORS)


class TestFirstPass:
    def test_zero_noise_recovery(self):
        factors = factor_frame()
        betas = loading_frame()
        alphas = pd.Series(np.linspace(-0.002, 0.002, len(betas)), index=betas.index)
        returns = factors @ betas.T + alphas
        loadings = first_pass(returns, factors, mode="full")
        assert_allclose(loadings.betas.loc[betas.index].to_numpy(), betas.to_numpy(), atol=1e-10)
        assert_allclose(loadings.intercepts[betas.index].to_numpy(), alphas.to_numpy(), atol=1e-10)
        assert set(loadings.status.values()) == {"ok"}

    def test_single_factor_unit_loading(self):
        factors = factor_frame()[["MKT"]]
        returns = pd.DataFrame({"A": factors["MKT"]})
        loadings = first_pass(returns, factors)
        assert loadings.betas.loc["A", "MKT"] == pytest.approx(1.0)
        assert loadings.intercepts["A"] == pytest.approx(0.0, abs=1e-12)

    def test_short_asset_is_flagged(self):
        factors = factor_frame(n=30)
        returns = factors @ loading_frame(n_assets=2).T
        returns.iloc[2:, 1] = np.nan
        loadings = first_pass(returns, factors)
        assert loadings.status == {"P0": "ok", "P1": "insufficient_window"}

    def test_rolling_first_usable_month(self):
        factors = factor_frame()
        returns = factors @ loading_frame().T
        loadings = first_pass(returns, factors, mode="rolling_short", frequency="monthly")
        assert loadings.window == 24
        months = loadings.betas.index.get_level_values("month")
        first_month = pd.Timestamp(factors.index[23]).to_period("M") + 1
        assert months.min() == first_month
        assert loadings.at(factors.index[23]).empty
        assert_allclose(loadings.at(factors.index[24]).loc["P0"].to_numpy(), loading_frame().loc["P0"].to_numpy())

    def test_rolling_has_no_look_ahead(self):
        factors = factor_frame()
        returns = factors @ loading_frame().T + 0.01 * np.random.default_rng(4).normal(size=(120, 12))
        base = first_pass(returns, factors, mode="rolling_short")
        perturbed = returns.copy()
        perturbed.iloc[40:] += 0.5 * np.random.default_rng(5).normal(size=perturbed.iloc[40:].shape)
        shifted = first_pass(perturbed, factors, mode="rolling_short")
        date = factors.index[40]
        assert_allclose(shifted.at(date).to_numpy(), base.at(date).to_numpy())
        assert not np.allclose(shifted.at(factors.index[41]).to_numpy(), base.at(factors.index[41]).to_numpy())

    def test_rolling_daily_snapshots(self):
        days = pd.bdate_range("2010-01-01", "2011-12-31")
        rng = np.random.default_rng(2)
        factors = pd.DataFrame(rng.normal(0, 0.01, (len(days), 2)), index=days, columns=FACTORS)
        returns = factors @ loading_frame(n_assets=3).T
        loadings = first_pass(returns, factors, mode="rolling_short", frequency="daily")
        assert loadings.window == 120
        first = days[119].to_period("M") + 1
        assert loadings.betas.index.get_level_values("month").min() == first

    def test_unknown_mode(self):
        factors = factor_frame()
        with pytest.raises(DomainError):
            first_pass(factors, factors, mode="expanding")


class TestSecondPass:
    def test_zero_noise_recovery(self):
        betas = loading_frame()
        dates = month_ends(36)
        rng = np.random.default_rng(3)
        gammas = pd.DataFrame(rng.normal(0.005, 0.02, (36, 3)), index=dates, columns=["gamma_0"] + FACTORS)
        returns = pd.DataFrame(
            gammas["gamma_0"].to_numpy()[:, None] + gammas[FACTORS].to_numpy() @ betas.to_numpy().T,
            index=dates, columns=betas.index)
        premia = second_pass(returns, FirstPassLoadings.fixed(betas))
        ok = premia.ok()
        assert len(ok) == 36
        for column in gammas.columns:
            assert_allclose(ok[column].to_numpy(), gammas[column].to_numpy(), atol=1e-10)

    def test_constant_premium_recovered_on_average(self):
        betas = loading_frame(n_assets=25)
        dates = month_ends(240)
        rng = np.random.default_rng(6)
        returns = pd.DataFrame(0.5 * betas["MKT"].to_numpy()[None, :] + 0.3 * rng.normal(size=(240, 25)),
                               index=dates, columns=betas.index)
        premia = second_pass(returns, FirstPassLoadings.fixed(betas))
        gamma = premia.gamma("MKT").to_numpy()
        se = gamma.std(ddof=1) / np.sqrt(gamma.size)
        assert abs(gamma.mean() - 0.5) < 3 * se
        assert fama_macbeth_tstat(gamma) == pytest.approx(gamma.mean() / se)

    def test_thin_cross_section_status(self):
        betas = loading_frame(n_assets=5)
        returns = pd.DataFrame(np.random.default_rng(0).normal(size=(2, 5)), index=month_ends(2),
                               columns=betas.index)
        returns.iloc[1, :2] = np.nan
        premia = second_pass(returns, FirstPassLoadings.fixed(betas))
        assert list(premia.frame["status"]) == ["ok", "thin_cross_section"]
        assert premia.frame["n"].tolist() == [5, 3]

    def test_winsorized_loadings(self):
        betas = loading_frame(n_assets=20)
        betas.iloc[0, 0] = 25.0
        returns = pd.DataFrame(np.random.default_rng(1).normal(size=(5, 20)), index=month_ends(5),
                               columns=betas.index)
        raw = second_pass(returns, FirstPassLoadings.fixed(betas))
        clipped = second_pass(returns, FirstPassLoadings.fixed(betas), winsorize_loadings=0.1)
        assert not np.allclose(raw.gamma("MKT").to_numpy(), clipped.gamma("MKT").to_numpy())


@pytest.fixture
def premium_outcomes():
    spec = StudySpec((LayerSpec("factor", ("MKT", "SMB")), LayerSpec("assets", ("a", "b"))))
    frame = pd.DataFrame({
        "path_index": [0, 1, 2, 3],
        "factor": ["MKT", "MKT", "SMB", "SMB"],
        "assets": ["a", "b", "a", "b"],
        "b": [0.01, 0.03, 0.002, 0.004],
        "aic": [10.0, 10.0, 10.0, 10.0],
        "status": ["ok", "ok", "ok", "error"],
    })
    dates = list(month_ends(24, "2001-01").strftime("%Y-%m-%d"))
    series = pd.DataFrame({
        "path_index": np.repeat([0, 1, 2], 24),
        "date": dates * 3,
        "gamma": np.concatenate([np.full(24, 0.01), np.full(24, 0.03), np.full(24, 0.002)]),
    })
    series.loc[(series["path_index"] == 1) & (series["date"] == dates[0]), "gamma"] = np.nan
    return OutcomeSet(spec, frame, series)


class TestSummaries:
    def test_path_weights_skip_failed(self, premium_outcomes):
        weights = path_weights(premium_outcomes.frame, "frequentist")
        assert list(weights.index) == [0, 1, 2]
        assert_allclose(weights.to_numpy(), [1 / 3] * 3)

    def test_unknown_scheme(self, premium_outcomes):
        with pytest.raises(DomainError):
            path_weights(premium_outcomes.frame, "median")

    def test_weighted_series_renormalizes(self, premium_outcomes):
        mkt = premium_outcomes.where(factor="MKT")
        series = weighted_premium_series(mkt, "uniform")
        assert series.iloc[0] == pytest.approx(0.01)
        assert series.iloc[1] == pytest.approx(0.02)

    def test_annualized_premia(self, premium_outcomes):
        table = annualized_premia(premium_outcomes.where(factor="MKT"), "uniform")
        assert table["year"].tolist() == [2001, 2002]
        assert table["n_months"].tolist() == [12, 12]
        assert table["n_paths"].tolist() == [2, 2]
        assert table.loc[1, "premium"] == pytest.approx(0.02)
        assert table.loc[1, "q25"] == pytest.approx(0.015)
        assert table.loc[1, "q75"] == pytest.approx(0.025)

    def test_comparator_etc(self, premium_outcomes):
        rng = np.random.default_rng(0)
        spec = StudySpec((LayerSpec("p", tuple(str(i) for i in range(40))), LayerSpec("q", ("x", "y"))))
        frame = pd.DataFrame({"path_index": np.arange(80), "b": rng.normal(0.005, 0.001, 80), "status": "ok"})
        table = comparator_etc(OutcomeSet(spec, frame), fit="empirical")
        assert table["comparator"].iloc[0] == "longest_sample"
        assert table["bstar"].iloc[0] == MARKET_PREMIUM_LONGEST_SAMPLE
        assert len(table) == 5
        assert (table["etc"] <= 1.0).all()
