import itertools

import numpy as np
import pandas as pd
import pytest
from scipy import stats

from pathgrid.grid import LayerSpec, StudySpec
from pathmetrics.etc import etc_from_probability, etc_score, ofo_from_probability
from pathmetrics.intervals import (
    fit_power_law,
    growth_rates,
    hacking_interval_report,
    hacking_intervals,
)
from pathmetrics.pcurve import (
    classify_kappa,
    histogram_violations,
    kappa_from_counts,
    p_values_from_t,
    pcurve_report,
)
from studies.outcomes import OutcomeSet
from utils.errors import DomainError

HARMONIC_5 = 1 + 1 / 2 + 1 / 3 + 1 / 4 + 1 / 5
TABLE_ARI = [0.779, 1.656, 2.662, 3.847, 5.278, 7.048, 9.285, 12.149, 15.745]


def grid_frame(sizes, values):
    layers = [f"L{j}" for j in range(len(sizes))]
    rows = []
    for choice, value in zip(itertools.product(*[range(s) for s in sizes]), values):
        rows.append({**{name: f"o{c}" for name, c in zip(layers, choice)}, "b": value, "status": "ok"})
    return pd.DataFrame(rows), layers


def brute_force_ari(frame, layers, n_fixed):
    ranges = []
    for fixed in itertools.combinations(layers, n_fixed):
        options = [sorted(frame[name].unique()) for name in fixed]
        for config in itertools.product(*options):
            mask = np.ones(len(frame), dtype=bool)
            for name, option in zip(fixed, config):
                mask &= (frame[name] == option).to_numpy()
            subset = frame.loc[mask, "b"]
            ranges.append(subset.max() - subset.min())
    return float(np.mean(ranges))


@pytest.fixture
def binary_outcomes():
    """b = x1 + 2 x2 + 4 x3 over three binary layers."""
    spec = StudySpec(tuple(LayerSpec(f"x{j}", ("0", "1")) for j in (1, 2, 3)))
    rows = []
    for index, bits in enumerate(itertools.product((0, 1), repeat=3)):
        rows.append({"path_index": index, "x1": str(bits[0]), "x2": str(bits[1]), "x3": str(bits[2]),
                     "b": bits[0] + 2 * bits[1] + 4 * bits[2], "status": "ok"})
    return OutcomeSet(spec, pd.DataFrame(rows))


class TestHackingIntervals:
    def test_binary_grid(self, binary_outcomes):
        one = hacking_intervals(binary_outcomes, 1)
        two = hacking_intervals(binary_outcomes, 2)
        assert one.n_intervals == 6 and two.n_intervals == 12
        assert one.ari == pytest.approx(14 / 3)
        assert two.ari == pytest.approx(7 / 3)
        assert one.n_free == 2

    def test_two_by_two(self):
        frame, layers = grid_frame((2, 2), [0.0, 1.0, 2.0, 4.0])
        result = hacking_intervals(frame, 1, layers=layers)
        by_layer = result.ranges.groupby("fixed_layers")["range"].apply(sorted).to_dict()
        assert by_layer == {"L0": [1.0, 2.0], "L1": [2.0, 3.0]}
        assert result.ari == pytest.approx(2.0)

    def test_constant_outcomes(self):
        frame, layers = grid_frame((2, 3, 2), [1.5] * 12)
        assert hacking_intervals(frame, 1, layers=layers).ari == 0.0

    def test_failed_paths_are_excluded(self, binary_outcomes):
        frame = binary_outcomes.frame.copy()
        frame.loc[frame["path_index"] == 7, "status"] = "error"
        report = hacking_interval_report(OutcomeSet(binary_outcomes.spec, frame))
        assert report.n_excluded == 1
        assert report.slices[2].ranges["n_paths"].sum() == 7 * 3

    def test_k_out_of_range(self, binary_outcomes):
        with pytest.raises(DomainError):
            hacking_intervals(binary_outcomes, 3)
        with pytest.raises(DomainError):
            hacking_intervals(binary_outcomes, 0)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_oracle_and_grows_with_free_layers(self, seed):
        rng = np.random.default_rng(seed)
        n_layers = int(rng.integers(2, 6))
        size = int(rng.integers(2, 4))
        sizes = (size,) * n_layers
        frame, layers = grid_frame(sizes, rng.normal(size=size ** n_layers))
        report = hacking_interval_report(frame, layers=layers)
        for k, piece in report.slices.items():
            assert piece.ari == pytest.approx(brute_force_ari(frame, layers, k))
        ari = report.ari_by_free().to_numpy()
        assert (np.diff(ari) >= -1e-12).all()

    def test_report_summary(self, binary_outcomes):
        report = hacking_interval_report(binary_outcomes)
        summary = report.summary_frame()
        assert summary["n_free"].tolist() == [1, 2]
        assert summary["rate"].iloc[1] == pytest.approx((14 / 3) / (7 / 3) - 1)
        assert report.power_law is not None
        assert "power_law" in report.to_dict()


class TestPowerLaw:
    def test_growth_rates(self):
        rates = growth_rates(pd.Series(TABLE_ARI, index=range(1, 10)))
        assert np.isnan(rates.iloc[0])
        assert rates.iloc[1] == pytest.approx(1.656 / 0.779 - 1)

    def test_fit_to_published_shape(self):
        a, b = fit_power_law(TABLE_ARI)
        assert 1.35 <= b <= 1.50
        assert a == pytest.approx(0.78, abs=0.05)

    def test_exact_geometric(self):
        n = np.arange(1, 6)
        a, b = fit_power_law(pd.Series(2.0 * 1.5 ** n, index=n))
        assert (a, b) == (pytest.approx(2.0), pytest.approx(1.5))

    def test_nonpositive(self):
        with pytest.raises(DomainError):
            fit_power_law([1.0, 0.0, 2.0])
        with pytest.raises(DomainError):
            fit_power_law([1.0])


class TestEaseToConfirm:
    def test_worked_examples(self):
        assert etc_from_probability(0.998, 0.9) == pytest.approx(0.02, abs=1e-12)
        assert etc_from_probability(0.998, 0.95) == pytest.approx(0.04, abs=1e-12)

    def test_below_quantile(self):
        assert ofo_from_probability(0.5, 0.9) == 0.0
        report = etc_score(np.arange(1.0, 101.0), bstar=50.0, q=0.9, fit="empirical")
        assert report.etc == 1.0

    def test_empirical(self):
        report = etc_score(np.arange(1.0, 101.0), bstar=95.0, q=0.9, fit="empirical")
        assert report.theta == pytest.approx(90.1)
        assert report.cdf_at_bstar == pytest.approx(0.95)
        assert report.ofo == pytest.approx(0.5)
        assert report.etc == pytest.approx(0.5)

    def test_gaussian_fit(self):
        values = np.random.default_rng(0).normal(0.1, 0.05, 400)
        report = etc_score(values, bstar=0.25, q=0.9)
        law = stats.norm(values.mean(), values.std(ddof=1))
        assert report.theta == pytest.approx(law.ppf(0.9))
        assert report.ofo == pytest.approx((law.cdf(0.25) - 0.9) / 0.1)

    def test_student_scale(self):
        values = np.random.default_rng(1).normal(size=200)
        report = etc_score(values, bstar=2.0, q=0.9, fit="student", nu=5)
        assert report.scale == pytest.approx(values.std(ddof=1) * np.sqrt(3 / 5))
        assert report.nu == 5

    def test_monotone_in_bstar_and_q(self):
        values = np.random.default_rng(2).normal(size=300)
        scores = [etc_score(values, bstar=b, q=0.9).etc for b in np.linspace(0.0, 4.0, 41)]
        assert (np.diff(scores) <= 1e-12).all()
        for bstar in (2.0, 2.5, 3.0):
            assert etc_score(values, bstar, q=0.95).etc >= etc_score(values, bstar, q=0.9).etc

    def test_parametric_fit_needs_sample(self):
        with pytest.raises(DomainError):
            etc_score(np.arange(10.0), bstar=5.0, fit="gaussian")
        with pytest.raises(DomainError):
            etc_score(np.arange(40.0), bstar=5.0, fit="student", nu=2)

    def test_invalid_inputs(self):
        with pytest.raises(DomainError):
            etc_score([1.0, 2.0], bstar=1.0, fit="kernel")
        with pytest.raises(DomainError):
            etc_score([np.nan], bstar=1.0, fit="empirical")
        with pytest.raises(DomainError):
            ofo_from_probability(0.9, 1.0)


class TestPCurve:
    def test_uniform_histogram(self):
        kappa, complete, undefined = kappa_from_counts([10] * 10)
        assert kappa == pytest.approx(HARMONIC_5, abs=1e-10)
        assert complete and undefined == []
        assert classify_kappa(kappa) == "problematic"

    def test_geometric_histogram(self):
        kappa, _, _ = kappa_from_counts(1e9 * 0.1 ** np.arange(10))
        assert kappa == pytest.approx(0.1 * HARMONIC_5, abs=1e-10)
        assert classify_kappa(kappa) == "unnecessary"

    def test_halving_then_flat(self):
        kappa, _, _ = kappa_from_counts([8, 4, 2, 1, 1, 1, 1, 1, 1, 1])
        assert kappa == pytest.approx(0.5 + 0.25 + 0.5 / 3 + 0.25 + 0.2)

    @pytest.mark.parametrize("kappa, label", [
        (0.1, "unnecessary"), (0.25, "possible"), (0.4, "possible"), (0.41, "problematic"),
    ])
    def test_class_boundaries(self, kappa, label):
        assert classify_kappa(kappa) == label

    def test_zero_bin(self):
        kappa, complete, undefined = kappa_from_counts([4, 0, 2, 1])
        assert undefined == [2]
        assert not complete
        assert kappa == pytest.approx(0.0)

    def test_odd_bins(self):
        with pytest.raises(DomainError):
            kappa_from_counts([1, 2, 3])

    def test_violations(self):
        monotone, convexity = histogram_violations([10, 5, 4, 1, 1, 1, 1, 1, 1, 1])
        assert monotone == [4]
        assert convexity == [2, 4]
        assert histogram_violations([100, 40, 20, 12, 8, 6, 5, 5, 5, 5]) == ([], [])

    def test_report(self):
        p = np.concatenate([np.full(40, 0.05), np.full(20, 0.15), np.full(5, 0.25), np.full(5, 0.75)])
        report = pcurve_report(p)
        assert report.n_values == 70
        assert report.counts[:3].tolist() == [40, 20, 5]
        assert report.kappa == pytest.approx(0.5 + 0.125)
        assert report.label == "problematic"
        assert report.to_dict()["class"] == "problematic"

    def test_duplicating_values_keeps_kappa(self):
        p = np.random.default_rng(3).beta(0.5, 3.0, size=300)
        assert pcurve_report(np.tile(p, 2)).kappa == pytest.approx(pcurve_report(p).kappa)

    def test_rejects_invalid_p_values(self):
        with pytest.raises(DomainError):
            pcurve_report([])
        with pytest.raises(DomainError):
            pcurve_report([0.2, 1.5])

    def test_p_values_from_t(self):
        assert p_values_from_t([1.96])[0] == pytest.approx(0.05, abs=1e-3)
        assert p_values_from_t([1.645, np.nan], alternative="greater").tolist() == [
            pytest.approx(0.05, abs=1e-3)]
        with pytest.raises(DomainError):
            p_values_from_t([1.0], alternative="less")
