"""
p-curve triage: histogram conditions expected without p-hacking
(decreasing, convex counts on the critical half) and the kappa score.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
from scipy import stats

from utils.errors import DomainError

UNNECESSARY_BELOW = 0.25
POSSIBLE_UP_TO = 0.4
ALTERNATIVES = ("two-sided", "greater")


@dataclass
class PCurveReport:
    counts: np.ndarray
    bins: int
    monotone_violations: List[int]
    convexity_violations: List[int]
    undefined_ratios: List[int]
    kappa: float
    complete: bool
    label: str
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_values(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "counts": self.counts.tolist(),
            "bins": self.bins,
            "n_values": self.n_values,
            "monotone_violations": self.monotone_violations,
            "convexity_violations": self.convexity_violations,
            "undefined_ratios": self.undefined_ratios,
            "kappa": self.kappa,
            "kappa_complete": self.complete,
            "class": self.label,
            **self.extra,
        }


def classify_kappa(kappa: float) -> str:
    if kappa < UNNECESSARY_BELOW:
        return "unnecessary"
    if kappa <= POSSIBLE_UP_TO:
        return "possible"
    return "problematic"


def kappa_from_counts(counts):
    """sum_{i=1}^{I/2} (n_{i+1}/n_i) / i over defined terms.

    Returns (kappa, complete, undefined) where undefined lists the
    1-based i whose n_i is zero.
    """
    counts = np.asarray(counts, dtype=float)
    n_bins = counts.size
    if n_bins < 2 or n_bins % 2:
        raise DomainError(f"Bin count must be even and at least 2, got {n_bins}")
    kappa, undefined = 0.0, []
    for i in range(1, n_bins // 2 + 1):
        if counts[i - 1] == 0:
            undefined.append(i)
            continue
        kappa += counts[i] / counts[i - 1] / i
    return float(kappa), not undefined, undefined


def histogram_violations(counts):
    """1-based i failing n_i > n_{i+1} and, where defined, n_i/n_{i+1} > n_{i+1}/n_{i+2}."""
    counts = np.asarray(counts, dtype=float)
    last = (counts.size - 1) // 2
    monotone, convexity = [], []
    for i in range(1, last + 1):
        n_i, n_next = counts[i - 1], counts[i]
        if not n_i > n_next:
            monotone.append(i)
        if i + 1 < counts.size and n_next > 0 and counts[i + 1] > 0:
            if not n_i / n_next > n_next / counts[i + 1]:
                convexity.append(i)
    return monotone, convexity


def pcurve_report(p_values, bins: int = 10) -> PCurveReport:
    """Histogram of p-values over ``bins`` equal cells of [0, 1] with kappa and its class."""
    values = np.asarray(p_values, dtype=float).ravel()
    if values.size == 0:
        raise DomainError("No p-values given")
    if np.isnan(values).any() or (values < 0).any() or (values > 1).any():
        raise DomainError("p-values must lie in [0, 1]")
    if bins < 2 or bins % 2:
        raise DomainError(f"Bin count must be even and at least 2, got {bins}")
    counts, _ = np.histogram(values, bins=bins, range=(0.0, 1.0))
    kappa, complete, undefined = kappa_from_counts(counts)
    monotone, convexity = histogram_violations(counts)
    return PCurveReport(counts, bins, monotone, convexity, undefined, kappa, complete, classify_kappa(kappa))


def p_values_from_t(tstats, alternative: str = "two-sided") -> np.ndarray:
    """Normal p-values of t-statistics, NaN entries dropped."""
    if alternative not in ALTERNATIVES:
        raise DomainError(f"Unknown alternative '{alternative}', expected one of {ALTERNATIVES}")
    t = np.asarray(tstats, dtype=float).ravel()
    t = t[np.isfinite(t)]
    if alternative == "greater":
        return stats.norm.sf(t)
    return 2.0 * stats.norm.sf(np.abs(t))
