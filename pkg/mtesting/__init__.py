"""Bootstrap reality check and path-based exhaustive multiple testing."""

from mtesting.bootstrap import block_bootstrap, block_bootstrap_indices, iter_replicate_chunks, replicate_rng
from mtesting.maxstat import (
    BENCHMARKS,
    MaxStatDistribution,
    PathMoments,
    brc_statistics,
    brc_threshold,
    emt_benchmark,
    emt_from_outcomes,
    emt_statistics,
    emt_threshold,
    gaussian_max_quantile,
    path_label,
    sort_descending,
    threshold,
)
