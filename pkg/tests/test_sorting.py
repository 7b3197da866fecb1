import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from sorting.portfolios import (
    CrossSection,
    SortConfig,
    clean_characteristic,
    form_from_section,
    form_portfolio,
    longshort_returns,
    sharpe_tstat,
)
from utils.errors import DomainError, EmptyLegError, InsufficientWindowError, ThinCrossSectionError


def section(n=20, seed=0):
    rng = np.random.default_rng(seed)
    return CrossSection(
        permnos=np.arange(1, n + 1, dtype=np.int64),
        values=rng.permutation(np.arange(1.0, n + 1)),
        mvel1=rng.uniform(10, 100, n),
        retvol=rng.uniform(0.01, 0.1, n),
    )


def top_permnos(cs, count, largest=True):
    order = np.argsort(cs.values)
    picked = order[-count:] if largest else order[:count]
    return set(cs.permnos[picked].tolist())


class TestSortConfig:
    @pytest.mark.parametrize("kwargs", [
        {"q": 0.0}, {"q": 0.5}, {"holding": 4}, {"weighting": "MW"}, {"cleaning": "drop"},
    ])
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(DomainError):
            SortConfig("mom", **kwargs)


class TestFormation:
    @pytest.mark.parametrize("q, size", [(0.1, 2), (0.2, 4), (0.25, 5), (0.3, 6)])
    def test_leg_sizes(self, q, size):
        cs = section()
        long, short = form_from_section(cs, SortConfig("x", q=q))
        assert len(long) == size and len(short) == size
        assert set(long.index) == top_permnos(cs, size)
        assert set(short.index) == top_permnos(cs, size, largest=False)

    @pytest.mark.parametrize("weighting", ["EW", "VW", "IVW", "CW"])
    def test_leg_weights_sum_to_one(self, weighting):
        long, short = form_from_section(section(), SortConfig("x", weighting=weighting))
        assert long.sum() == pytest.approx(1.0)
        assert short.sum() == pytest.approx(1.0)
        assert (long > 0).all() and (short > 0).all()

    def test_value_weights_follow_size(self):
        cs = section()
        long, _ = form_from_section(cs, SortConfig("x", weighting="VW"))
        caps = pd.Series(cs.mvel1, index=cs.permnos)[long.index]
        assert_allclose(long.to_numpy(), (caps / caps.sum()).to_numpy())

    def test_inverse_volatility_weights(self):
        cs = section()
        _, short = form_from_section(cs, SortConfig("x", weighting="IVW"))
        inverse = 1.0 / pd.Series(cs.retvol, index=cs.permnos)[short.index]
        assert_allclose(short.to_numpy(), (inverse / inverse.sum()).to_numpy())

    def test_characteristic_weights_use_all_stocks(self):
        cs = section()
        long, short = form_from_section(cs, SortConfig("x", weighting="CW"))
        assert set(long.index) == top_permnos(cs, 10)
        assert set(short.index) == top_permnos(cs, 10, largest=False)
        assert long[cs.permnos[np.argmax(cs.values)]] == pytest.approx(9.5 / 50.0)

    def test_characteristic_weights_follow_values(self):
        values = np.array([0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 12.8, 25.6, 51.2, 0.3, 0.5])
        cs = CrossSection(np.arange(1, 13, dtype=np.int64), values)
        long, short = form_from_section(cs, SortConfig("x", weighting="CW"))
        median = np.median(values)
        top = pd.Series(values - median, index=cs.permnos)[long.index]
        bottom = pd.Series(median - values, index=cs.permnos)[short.index]
        assert_allclose(long.to_numpy(), (top / top.sum()).to_numpy())
        assert_allclose(short.to_numpy(), (bottom / bottom.sum()).to_numpy())
        assert long[10] > 0.5

    def test_ties_broken_by_permno(self):
        cs = CrossSection(np.arange(1, 11, dtype=np.int64), np.ones(10))
        long, short = form_from_section(cs, SortConfig("x", q=0.2))
        assert set(long.index) == {9, 10}
        assert set(short.index) == {1, 2}

    def test_missing_values_are_skipped(self):
        cs = section(n=12)
        cs.values[[0, 1]] = np.nan
        long, short = form_from_section(cs, SortConfig("x", q=0.2))
        assert len(long) == 2 and len(short) == 2

    def test_thin_cross_section(self):
        with pytest.raises(ThinCrossSectionError):
            form_from_section(section(n=9), SortConfig("x"))

    def test_empty_leg(self):
        with pytest.raises(EmptyLegError):
            form_from_section(section(), SortConfig("x", q=0.01))

    def test_value_weighting_needs_size(self):
        cs = CrossSection(np.arange(1, 21, dtype=np.int64), np.arange(20.0))
        with pytest.raises(DomainError):
            form_from_section(cs, SortConfig("x", weighting="VW"))

    def test_form_portfolio_on_panel(self, make_characteristics_frame):
        panel = make_characteristics_frame()
        date = panel["date"].iloc[0]
        long, short = form_portfolio(panel, SortConfig("value", q=0.2), date)
        rows = panel[panel["date"] == date].set_index("permno")["value"]
        assert rows[long.index].min() > rows[short.index].max()


class TestCleaning:
    def test_impute_carries_value_forward(self, make_characteristics_frame):
        panel = make_characteristics_frame()
        cleaned = clean_characteristic(panel, "mom", "impute")
        dates = sorted(panel["date"].unique())
        stock = cleaned[cleaned["permno"] == 10005].set_index("date")["mom"]
        assert stock[dates[10]] == stock[dates[9]]
        assert len(cleaned) == len(panel)

    def test_remove_drops_missing(self, make_characteristics_frame):
        panel = make_characteristics_frame()
        assert len(clean_characteristic(panel, "mom", "remove")) == len(panel) - 1

    def test_unknown_characteristic(self, make_characteristics_frame):
        with pytest.raises(DomainError):
            clean_characteristic(make_characteristics_frame(), "beta", "impute")


class TestLongShortReturns:
    def test_planted_signals_have_their_signs(self, make_characteristics_frame):
        panel = make_characteristics_frame()
        mom = longshort_returns(panel, SortConfig("mom"))
        value = longshort_returns(panel, SortConfig("value"))
        assert len(mom) == 90
        assert sharpe_tstat(mom.returns) > 2
        assert sharpe_tstat(value.returns) < -2

    def test_sign_flip_negates_spread(self, make_characteristics_frame):
        panel = make_characteristics_frame()
        flipped = panel.assign(mom=-panel["mom"])
        for weighting in ("EW", "VW", "CW"):
            base = longshort_returns(panel, SortConfig("mom", weighting=weighting)).returns
            mirrored = longshort_returns(flipped, SortConfig("mom", weighting=weighting)).returns
            assert_allclose(mirrored.to_numpy(), -base.to_numpy(), atol=1e-15)

    def test_monotone_transform_invariance(self, make_characteristics_frame):
        panel = make_characteristics_frame()
        shifted = panel.assign(size=np.exp(3.0 * panel["size"]) + 1.0)
        base = longshort_returns(panel, SortConfig("size")).returns
        assert_allclose(longshort_returns(shifted, SortConfig("size")).returns.to_numpy(), base.to_numpy())

    def test_holding_period_keeps_cohorts(self, make_characteristics_frame):
        panel = make_characteristics_frame()
        series = longshort_returns(panel, SortConfig("mom", holding=3))
        assert len(series.long_counts) == 30
        assert len(series.returns) == 90
        assert (series.long_counts == 4).all()

    def test_window(self, make_characteristics_frame):
        panel = make_characteristics_frame()
        dates = sorted(panel["date"].unique())
        series = longshort_returns(panel, SortConfig("mom", start=dates[30], end=dates[60]))
        assert len(series) == 30
        assert series.returns.index[0] == dates[30]
        with pytest.raises(InsufficientWindowError):
            longshort_returns(panel, SortConfig("mom", start=dates[0], end=dates[20]))


class TestSharpe:
    def test_formula(self):
        rng = np.random.default_rng(0)
        values = rng.normal(0.01, 0.05, 120)
        assert sharpe_tstat(values) == pytest.approx(np.sqrt(120) * values.mean() / values.std(ddof=1))

    def test_constant_series(self):
        with pytest.raises(DomainError):
            sharpe_tstat(np.full(30, 0.01))

    def test_short_series(self):
        with pytest.raises(InsufficientWindowError):
            sharpe_tstat(np.arange(10.0))
