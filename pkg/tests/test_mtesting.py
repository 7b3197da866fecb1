import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy.stats import norm

from mtesting.bootstrap import block_bootstrap, block_bootstrap_indices, iter_replicate_chunks
from mtesting.maxstat import (
    PathMoments,
    brc_statistics,
    brc_threshold,
    emt_from_outcomes,
    emt_threshold,
    gaussian_max_quantile,
    path_label,
    threshold,
)
from utils.errors import DomainError


def iid_panel(n_rows=240, n_cols=20, seed=0, scale=0.05):
    return np.random.default_rng(seed).normal(0.0, scale, (n_rows, n_cols))


class TestBlockBootstrap:
    def test_blocks_are_contiguous(self):
        index = block_bootstrap_indices(25, 6, np.random.default_rng(0))
        assert index.size == 25
        assert index.min() >= 0 and index.max() <= 24
        for start in range(0, 24, 6):
            block = index[start:start + 6]
            assert_array_equal(np.diff(block), np.ones(block.size - 1))

    def test_full_length_block_copies_data(self):
        data = iid_panel(n_rows=30, n_cols=3)
        replicates = block_bootstrap(data, block_length=30, replicates=4, seed=1)
        for replicate in replicates:
            assert_array_equal(replicate, data)

    def test_rows_move_together(self):
        data = np.column_stack([np.arange(50.0), 100 + np.arange(50.0)])
        replicates = block_bootstrap(data, block_length=5, replicates=3, seed=2)
        assert_array_equal(replicates[..., 1], replicates[..., 0] + 100)

    def test_deterministic_and_chunk_independent(self):
        data = iid_panel(n_rows=60, n_cols=4)
        full = block_bootstrap(data, 12, 20, seed=3)
        assert_array_equal(full, block_bootstrap(data, 12, 20, seed=3))
        chunks = np.concatenate([chunk for _, chunk in iter_replicate_chunks(data, 12, 20, seed=3, chunk_size=7)])
        assert_array_equal(chunks, full)

    def test_invalid_block(self):
        with pytest.raises(DomainError):
            block_bootstrap(np.zeros((10, 2)), block_length=11, replicates=2)
        with pytest.raises(DomainError):
            block_bootstrap(np.zeros((10, 2)), block_length=0, replicates=2)


class TestGaussianMaxQuantile:
    def test_single_test(self):
        assert gaussian_max_quantile(1, 1.0, 0.975) == pytest.approx(norm.ppf(0.975))
        assert gaussian_max_quantile(1, 2.0, 0.975) == pytest.approx(2 * norm.ppf(0.975))

    def test_matches_simulation(self):
        draws = np.random.default_rng(4).normal(size=(200_000, 10)).max(axis=1)
        assert gaussian_max_quantile(10, 1.0, 0.95) == pytest.approx(np.quantile(draws, 0.95), abs=0.02)

    def test_domain(self):
        with pytest.raises(DomainError):
            gaussian_max_quantile(2, 1.0, 0.2)
        with pytest.raises(DomainError):
            gaussian_max_quantile(0, 1.0, 0.9)
        with pytest.raises(DomainError):
            gaussian_max_quantile(3, 0.0, 0.9)


class TestRealityCheck:
    def test_statistics_are_sorted(self):
        data = iid_panel(n_rows=60, n_cols=5)
        statistics = brc_statistics(block_bootstrap(data, 6, 10, seed=0), data)
        assert statistics.shape == (10, 5)
        assert (np.diff(statistics, axis=1) <= 0).all()

    def test_single_series_matches_normal_quantile(self):
        data = np.random.default_rng(5).normal(size=240)
        result = brc_threshold(data, block_length=1, replicates=576, seed=6)
        assert result.n_replicates == 576
        assert result.threshold == pytest.approx(norm.ppf(0.95), abs=0.25)

    def test_replicate_count_stability(self):
        data = iid_panel(n_cols=82, seed=7)
        small = brc_threshold(data, block_length=12, replicates=576, seed=8)
        large = brc_threshold(data, block_length=12, replicates=5_760, seed=8)
        assert small.threshold == pytest.approx(large.threshold, rel=0.05)

    def test_chunking_and_workers_do_not_change_result(self):
        data = iid_panel(n_rows=120, n_cols=10, seed=9)
        base = brc_threshold(data, block_length=12, replicates=100, seed=10, chunk_size=64)
        assert_array_equal(brc_threshold(data, 12, 100, seed=10, chunk_size=9).maxima, base.maxima)
        assert_array_equal(brc_threshold(data, 12, 100, seed=10, chunk_size=16, n_jobs=2).maxima, base.maxima)

    def test_constant_column_is_flagged(self):
        data = iid_panel(n_rows=60, n_cols=3, seed=11)
        data[:, 1] = 0.5
        result = brc_threshold(data, block_length=6, replicates=50, seed=0)
        assert result.n_flagged == 50
        assert np.isfinite(result.maxima).all()

    def test_threshold_quantile(self):
        assert threshold(np.arange(1.0, 101.0), 0.95) == pytest.approx(95.05)
        assert threshold([np.nan, 1.0, 3.0], 0.5) == pytest.approx(2.0)
        with pytest.raises(DomainError):
            threshold([np.nan], 0.95)
        with pytest.raises(DomainError):
            threshold([1.0], 1.0)


class TestPathBasedTesting:
    def test_reduces_to_bootstrap_on_replicates(self):
        data = iid_panel(n_rows=120, n_cols=8, seed=12)
        samples = block_bootstrap(data, 12, 200, seed=13)
        moments = PathMoments.from_samples(samples)
        emt = emt_threshold(moments, benchmark=data.mean(axis=0))
        brc = brc_threshold(data, block_length=12, replicates=200, seed=13)
        assert_allclose(emt.maxima, brc.maxima)
        assert emt.threshold == pytest.approx(brc.threshold)
        assert emt.benchmark == "explicit"

    def test_heterogeneous_paths_raise_the_hurdle(self):
        wins = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            data = rng.normal(0.0, 0.05, (120, 20))
            shifts = rng.uniform(-2.0, 2.0, (60, 1, 20)) * 0.05
            paths = np.concatenate([data[None], data[None] + shifts])
            moments = PathMoments.from_samples(paths, path_labels=["default"] + [f"p{i}" for i in range(60)])
            emt = emt_threshold(moments, "pointwise", default_path="default")
            brc = brc_threshold(data, block_length=12, replicates=200, seed=seed)
            wins += emt.threshold > brc.threshold
        assert wins >= 19

    def test_benchmarks(self):
        moments = PathMoments(means=[[0.1, 0.2], [0.3, 0.0]], sds=[[1.0, 1.0], [1.0, 1.0]],
                              counts=[[100, 100], [100, 100]], path_labels=["d", "e"], anomaly_labels=["a", "b"])
        pointwise = emt_threshold(moments, "pointwise", default_path="d")
        assert_allclose(pointwise.maxima, [0.0, 2.0])
        average = emt_threshold(moments, "average")
        assert_allclose(average.maxima, [1.0, 1.0])
        with pytest.raises(DomainError):
            emt_threshold(moments, "pointwise")
        with pytest.raises(DomainError):
            emt_threshold(moments, [0.0])
        with pytest.raises(DomainError):
            emt_threshold(moments, "median")

    def test_shape_check(self):
        with pytest.raises(DomainError):
            PathMoments(np.zeros((2, 2)), np.ones((2, 3)), np.ones((2, 2)), ["a", "b"], ["x", "y"])

    def test_moments_from_outcome_table(self):
        frame = pd.DataFrame({
            "characteristic": ["mom", "value", "mom", "value"],
            "cleaning": ["impute", "impute", "remove", "remove"],
            "b": [0.01, 0.02, 0.03, np.nan],
            "se": [0.001, 0.002, 0.003, np.nan],
            "n": [100.0, 100.0, 81.0, np.nan],
            "status": ["ok", "ok", "ok", "thin_cross_section"],
        })
        moments = emt_from_outcomes(frame, layers=["characteristic", "cleaning"])
        assert moments.path_labels == ["impute", "remove"]
        assert moments.anomaly_labels == ["mom", "value"]
        assert_allclose(moments.sds[0], [0.01, 0.02])
        assert moments.sds[1, 0] == pytest.approx(0.027)
        assert np.isnan(moments.means[1, 1])

    def test_path_label(self):
        choices = {"characteristic": "mom", "cleaning": "impute", "q": "0.2"}
        assert path_label(choices, ["characteristic", "cleaning", "q"]) == "impute|0.2"
