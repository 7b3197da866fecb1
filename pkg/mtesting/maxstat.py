"""
Max-statistic multiple testing: the bootstrap reality check, its
path-based counterpart and the analytic quantile of the maximum of N
independent Gaussians.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.special import erfinv

from mtesting.bootstrap import _check_block, replicate_indices
from utils.errors import DomainError

QUANTILE_METHOD = "linear"
BENCHMARKS = ("pointwise", "average")


@dataclass
class MaxStatDistribution:
    """Per-replicate largest statistic and the resulting threshold.

    ``maxima`` holds the largest statistic of every replicate (bootstrap
    sample or path), NaN for replicates flagged for a zero sd.
    """

    maxima: np.ndarray
    kind: str
    level: float
    threshold: float
    n_flagged: int = 0
    benchmark: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_replicates(self) -> int:
        return int(self.maxima.size)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.kind,
            "level": self.level,
            "threshold": self.threshold,
            "benchmark": self.benchmark,
            "replicates": self.n_replicates,
            "flagged": self.n_flagged,
            "quantile_method": QUANTILE_METHOD,
            **self.extra,
        }

    def maxima_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"replicate": np.arange(self.n_replicates), "kind": self.kind,
                             "max_stat": self.maxima})


def sort_descending(statistics: np.ndarray) -> np.ndarray:
    """Sort each row from largest to smallest, NaN last."""
    return -np.sort(-statistics, axis=-1)


def _column_moments(samples: np.ndarray):
    """Mean, ddof-1 sd and non-missing count along the time axis (axis -2)."""
    counts = np.sum(np.isfinite(samples), axis=-2)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.nanmean(samples, axis=-2)
        sds = np.nanstd(samples, axis=-2, ddof=1)
    return means, sds, counts


def _scaled_statistics(means, sds, counts, benchmark) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        stats = np.sqrt(counts) * (means - benchmark) / sds
    # zero-sd columns are flagged, not infinite
    return np.where(sds > 0, stats, np.nan)


def brc_statistics(replicates, original) -> np.ndarray:
    """Sorted sqrt(T) (mu_b - mu) / sigma_b per replicate (B x N)."""
    replicates = np.asarray(replicates, dtype=float)
    original = np.asarray(original, dtype=float)
    if original.ndim == 1:
        original = original[:, None]
    if replicates.ndim == 2:
        replicates = replicates[None, :, :]
    if replicates.shape[1:] != original.shape:
        raise DomainError(f"Replicates of shape {replicates.shape[1:]} do not match data {original.shape}")
    benchmark = np.nanmean(original, axis=0)
    means, sds, counts = _column_moments(replicates)
    return sort_descending(_scaled_statistics(means, sds, counts, benchmark))


def _maxima(sorted_statistics: np.ndarray) -> np.ndarray:
    """Largest finite statistic per replicate, NaN when none is finite."""
    return sorted_statistics[..., 0]


def _n_flagged(sorted_statistics: np.ndarray) -> int:
    return int(np.isnan(sorted_statistics).any(axis=-1).sum())


def threshold(maxima, level: float = 0.95) -> float:
    """level-quantile of the per-replicate maxima (linear interpolation, NaN ignored)."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"Level must lie in (0, 1), got {level}")
    values = np.asarray(maxima, dtype=float).ravel()
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise DomainError("No finite maximum statistics to take a quantile of")
    return float(np.quantile(values, level, method=QUANTILE_METHOD))


def _chunk_maxima(matrix: np.ndarray, benchmark: np.ndarray, block_length: int, seed: int,
                  first: int, count: int) -> Tuple[np.ndarray, int]:
    samples = matrix[replicate_indices(matrix.shape[0], block_length, seed, first, count)]
    means, sds, counts = _column_moments(samples)
    statistics = sort_descending(_scaled_statistics(means, sds, counts, benchmark))
    return _maxima(statistics), _n_flagged(statistics)


def brc_threshold(series, block_length: int = 12, replicates: int = 576, seed: int = 0,
                  level: float = 0.95, chunk_size: int = 64, n_jobs: int = 1) -> MaxStatDistribution:
    """Bootstrap reality check threshold, streaming replicates in chunks."""
    matrix = np.asarray(series, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if replicates < 1:
        raise DomainError(f"Replicate count must be at least 1, got {replicates}")
    _check_block(matrix.shape[0], block_length)
    benchmark = np.nanmean(matrix, axis=0)
    chunks = [(first, min(chunk_size, replicates - first)) for first in range(0, replicates, chunk_size)]
    parts = Parallel(n_jobs=n_jobs)(
        delayed(_chunk_maxima)(matrix, benchmark, block_length, seed, first, count) for first, count in chunks
    )
    maxima = np.concatenate([part[0] for part in parts])
    return MaxStatDistribution(maxima, "bootstrap", level, threshold(maxima, level),
                               sum(part[1] for part in parts),
                               extra={"block_length": block_length, "seed": seed})


@dataclass
class PathMoments:
    """Per-path, per-anomaly mean, sd and sample size (P x N each)."""

    means: np.ndarray
    sds: np.ndarray
    counts: np.ndarray
    path_labels: Sequence[str]
    anomaly_labels: Sequence[str]

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=float)
        self.sds = np.asarray(self.sds, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        shape = (len(self.path_labels), len(self.anomaly_labels))
        for name in ("means", "sds", "counts"):
            if getattr(self, name).shape != shape:
                raise DomainError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @classmethod
    def from_samples(cls, samples, path_labels=None, anomaly_labels=None) -> "PathMoments":
        """Moments of a P x T x N stack of return samples."""
        samples = np.asarray(samples, dtype=float)
        means, sds, counts = _column_moments(samples)
        path_labels = list(path_labels) if path_labels is not None else [str(i) for i in range(samples.shape[0])]
        anomaly_labels = (list(anomaly_labels) if anomaly_labels is not None
                          else [str(i) for i in range(samples.shape[2])])
        return cls(means, sds, counts, path_labels, anomaly_labels)


def emt_benchmark(moments: PathMoments, benchmark: Union[str, Sequence[float]] = "pointwise",
                  default_path: Optional[str] = None) -> np.ndarray:
    if not isinstance(benchmark, str):
        values = np.asarray(benchmark, dtype=float)
        if values.shape != (len(moments.anomaly_labels),):
            raise DomainError("Explicit benchmark needs one value per anomaly")
        return values
    if benchmark not in BENCHMARKS:
        raise DomainError(f"Unknown benchmark '{benchmark}', expected one of {BENCHMARKS}")
    if benchmark == "average":
        return np.nanmean(moments.means, axis=0)
    labels = list(moments.path_labels)
    if default_path is None or default_path not in labels:
        raise DomainError(f"Pointwise benchmark needs the default path, '{default_path}' is not among the paths")
    return moments.means[labels.index(default_path)]


def emt_statistics(moments: PathMoments, benchmark: Union[str, Sequence[float]] = "pointwise",
                   default_path: Optional[str] = None) -> np.ndarray:
    """Sorted sqrt(T_p) (mu_p - mu) / sigma_p per path (P x N)."""
    center = emt_benchmark(moments, benchmark, default_path)
    return sort_descending(_scaled_statistics(moments.means, moments.sds, moments.counts, center))


def emt_threshold(moments: PathMoments, benchmark: Union[str, Sequence[float]] = "pointwise",
                  default_path: Optional[str] = None, level: float = 0.95) -> MaxStatDistribution:
    statistics = emt_statistics(moments, benchmark, default_path)
    maxima = _maxima(statistics)
    mode = benchmark if isinstance(benchmark, str) else "explicit"
    return MaxStatDistribution(maxima, "paths", level, threshold(maxima, level), _n_flagged(statistics),
                               benchmark=mode)


def emt_from_outcomes(outcomes, anomaly_layer: str = "characteristic",
                      layers: Optional[Sequence[str]] = None) -> PathMoments:
    """Path moments from an anomalies outcome table

    A path is the assignment of every layer except ``anomaly_layer``; the
    mean is ``b``, the sd is ``se * sqrt(n)`` and the sample size ``n``.
    Anomalies without an ok outcome on a path contribute NaN.
    """
    frame = getattr(outcomes, "frame", outcomes)
    if layers is None:
        spec = getattr(outcomes, "spec", None)
        if spec is None:
            raise DomainError("Layer names are required when outcomes carry no study spec")
        layers = list(spec.names)
    if anomaly_layer not in frame.columns:
        raise DomainError(f"Outcome table has no '{anomaly_layer}' column")
    path_layers = [name for name in layers if name != anomaly_layer]
    ok = frame[frame["status"] == "ok"].copy()
    ok["_path"] = ok[path_layers].astype(str).agg("|".join, axis=1) if path_layers else "all"
    ok["_sd"] = ok["se"].astype(float) * np.sqrt(ok["n"].astype(float))

    def pivot(column: str) -> pd.DataFrame:
        return ok.pivot(index="_path", columns=anomaly_layer, values=column).sort_index().sort_index(axis=1)

    means, sds, counts = pivot("b"), pivot("_sd"), pivot("n")
    return PathMoments(means.to_numpy(), sds.reindex_like(means).to_numpy(), counts.reindex_like(means).to_numpy(),
                       list(means.index), list(means.columns))


def path_label(choices: Dict[str, str], layers: Sequence[str], anomaly_layer: str = "characteristic") -> str:
    return "|".join(str(choices[name]) for name in layers if name != anomaly_layer)


def gaussian_max_quantile(n_tests: int, sigma: float, x: float) -> float:
    """Inverse cdf of the max of N iid N(0, sigma^2): sigma sqrt(2) erfinv(2 x^(1/N) - 1)."""
    if n_tests < 1:
        raise DomainError(f"N must be at least 1, got {n_tests}")
    if sigma <= 0:
        raise DomainError(f"Sigma must be positive, got {sigma}")
    if not 2.0 ** (-n_tests) < x < 1.0:
        raise DomainError(f"x must lie in (2^-N, 1) = ({2.0 ** (-n_tests)}, 1), got {x}")
    return float(sigma * np.sqrt(2.0) * erfinv(2.0 * x ** (1.0 / n_tests) - 1.0))
