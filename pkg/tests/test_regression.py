import numpy as np
import pytest
from numpy.testing import assert_allclose

import regression.post_treatment as post_treatment
from regression.ols import default_hac_lag, newey_west_se, ols
from regression.post_treatment import apply_post_treatment, get_post_treatment, register_post_treatment
from regression.predictive import (
    amihud_corrected_delta,
    ar1_coefficient,
    augmented_predictive,
    lead_sum,
    predictive_ols,
)
from utils.errors import DomainError, InsufficientWindowError, SingularDesignError, SpecValidationError


def with_constant(x):
    x = np.asarray(x, dtype=float)
    return np.column_stack([np.ones(x.shape[0]), x])


def bartlett_sandwich(X, residuals, lag):
    g = X * residuals[:, None]
    S = g.T @ g
    for l in range(1, lag + 1):
        gamma = g[l:].T @ g[:-l]
        S += (1 - l / (lag + 1)) * (gamma + gamma.T)
    bread = np.linalg.inv(X.T @ X)
    return np.sqrt(np.diag(bread @ S @ bread))


class TestOLS:
    def test_three_points(self):
        fit = ols(with_constant([1, 2, 3]), [1, 2, 4])
        assert fit.coefficients[1] == pytest.approx(1.5)
        assert fit.coefficients[0] == pytest.approx(-2 / 3)
        assert fit.n == 3
        assert fit.k == 1

    def test_exact_line(self):
        x = np.arange(1.0, 11.0)
        fit = ols(with_constant(x), 2 * x)
        assert_allclose(fit.coefficients, [0.0, 2.0], atol=1e-10)
        assert fit.rss == pytest.approx(0.0, abs=1e-18)

    def test_iid_standard_errors(self):
        rng = np.random.default_rng(1)
        X = with_constant(rng.normal(size=50))
        y = X @ [0.5, -1.0] + rng.normal(size=50)
        fit = ols(X, y)
        sigma2 = fit.rss / (50 - 2)
        assert_allclose(fit.se_iid, np.sqrt(np.diag(sigma2 * np.linalg.inv(X.T @ X))))
        assert_allclose(fit.t_iid, fit.coefficients / fit.se_iid)

    def test_aic_and_yvar(self):
        rng = np.random.default_rng(2)
        X = with_constant(rng.normal(size=40))
        y = rng.normal(size=40)
        fit = ols(X, y)
        assert fit.aic == pytest.approx(40 * np.log(fit.rss / 40) + 2 * 3)
        assert fit.yvar == pytest.approx(np.var(y))

    def test_singular_design(self):
        x = np.arange(10.0)
        with pytest.raises(SingularDesignError):
            ols(np.column_stack([np.ones(10), x, 2 * x]), x)

    def test_too_few_observations(self):
        with pytest.raises(DomainError):
            ols(with_constant([1.0, 2.0]), [1.0, 2.0])

    def test_missing_values(self):
        with pytest.raises(DomainError):
            ols(with_constant([1.0, np.nan, 3.0, 4.0]), [1.0, 2.0, 3.0, 4.0])

    def test_se_kind(self):
        fit = ols(with_constant(np.arange(10.0)), np.arange(10.0) ** 1.5)
        with pytest.raises(DomainError):
            fit.se("hac")
        with pytest.raises(DomainError):
            fit.se("robust")


class TestNeweyWest:
    @pytest.mark.parametrize("n, lag", [(50, 3), (100, 4), (200, 4), (1000, 6)])
    def test_default_lag(self, n, lag):
        assert default_hac_lag(n) == lag

    @pytest.mark.parametrize("lag", [0, 1, 3])
    def test_matches_hand_coded_sandwich(self, lag):
        rng = np.random.default_rng(5)
        X = with_constant(rng.normal(size=20))
        y = X @ [0.1, 0.4] + rng.normal(size=20)
        fit = ols(X, y, hac_lag=lag)
        assert fit.hac_lag == lag
        assert_allclose(fit.se_hac, bartlett_sandwich(X, fit.residuals, lag), atol=1e-8)

    def test_auto_lag(self):
        rng = np.random.default_rng(6)
        X = with_constant(rng.normal(size=120))
        fit = ols(X, rng.normal(size=120), hac_lag="auto")
        assert fit.hac_lag == default_hac_lag(120)
        assert_allclose(fit.t_hac, fit.coefficients / fit.se_hac)

    def test_lag_out_of_range(self):
        X = with_constant(np.arange(5.0))
        with pytest.raises(DomainError):
            newey_west_se(X, np.zeros(5), np.zeros(5), 5)


class TestPredictive:
    def test_lead_sum(self):
        assert_allclose(lead_sum([1, 2, 3, 4, 5], 2), [5, 7, 9])
        assert_allclose(lead_sum([1, 2, 3], 1), [2, 3])
        assert lead_sum([1, 2], 2).size == 0

    def test_amihud_correction(self):
        assert amihud_corrected_delta(0.9, 100) == pytest.approx(0.93811)
        with pytest.raises(DomainError):
            amihud_corrected_delta(0.5, 0)

    def test_ar1_coefficient(self):
        rng = np.random.default_rng(3)
        x = np.zeros(5000)
        for t in range(1, x.size):
            x[t] = 0.8 * x[t - 1] + rng.normal()
        delta, n = ar1_coefficient(x)
        assert n == 4999
        assert delta == pytest.approx(0.8, abs=0.03)

    def test_predictive_slope_recovers_loading(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=400)
        y = np.empty(400)
        y[0] = 0.0
        y[1:] = 0.5 * x[:-1] + 0.1 * rng.normal(size=399)
        fit = predictive_ols(x, y, horizon=1)
        assert fit.coefficients[1] == pytest.approx(0.5, abs=0.02)
        assert fit.n == 399
        assert fit.se_hac is not None

    def test_predictive_horizon_sums_leads(self):
        rng = np.random.default_rng(8)
        x, y = rng.normal(size=60), rng.normal(size=60)
        fit = predictive_ols(x, y, horizon=3, hac_lag=None)
        direct = ols(with_constant(x[:57]), lead_sum(y, 3))
        assert_allclose(fit.coefficients, direct.coefficients)

    def test_predictive_short_window(self):
        with pytest.raises(InsufficientWindowError):
            predictive_ols([1.0, 2.0, 4.0, 3.0], [0.1, 0.2, 0.3, 0.1], horizon=1)

    def test_augmented_columns(self):
        rng = np.random.default_rng(9)
        x = np.cumsum(rng.normal(size=200)) * 0.1 + rng.normal(size=200)
        y = rng.normal(size=200)
        fit = augmented_predictive(x, y, horizon=1, use_amihud_correction=False, hac_lag=None)
        delta, _ = ar1_coefficient(x)
        innovations = x[1:] - delta * x[:-1]
        direct = ols(np.column_stack([np.ones(199), x[:199], innovations[:199]]), lead_sum(y, 1))
        assert_allclose(fit.coefficients, direct.coefficients)
        assert fit.k == 2

    def test_augmented_short_window(self):
        with pytest.raises(InsufficientWindowError):
            augmented_predictive([1.0, 3.0, 2.0, 5.0, 4.0], [0.1, 0.3, 0.2, 0.1, 0.0], horizon=1)

    def test_constant_predictor(self):
        with pytest.raises(DomainError):
            predictive_ols(np.ones(20), np.arange(20.0))


class TestPostTreatment:
    @pytest.fixture(autouse=True)
    def isolated_registry(self, monkeypatch):
        monkeypatch.setattr(post_treatment, "_TREATMENTS", dict(post_treatment._TREATMENTS))

    def test_defaults_are_identity(self):
        estimate = {"b": 0.2, "se_iid": 0.1, "se_hac": 0.15, "se": 0.15, "t": 0.2 / 0.15}
        assert apply_post_treatment("none", estimate) == estimate
        assert apply_post_treatment("adjusted", estimate) == estimate

    def test_unknown_name(self):
        with pytest.raises(SpecValidationError):
            get_post_treatment("shrunk")

    def test_registered_treatment_applies(self):
        register_post_treatment("halved", lambda e: dict(e, b=e["b"] / 2, t=e["t"] / 2))
        treated = apply_post_treatment("halved", {"b": 1.0, "se": 0.5, "t": 2.0})
        assert treated == {"b": 0.5, "se": 0.5, "t": 1.0}

    def test_dropping_fields_fails(self):
        register_post_treatment("lossy", lambda e: {"b": e["b"]})
        with pytest.raises(SpecValidationError):
            apply_post_treatment("lossy", {"b": 1.0, "se": 0.5})
