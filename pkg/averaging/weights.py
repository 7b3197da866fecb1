"""
Frequentist (AIC) and Bayesian model averaging over path outcomes.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
from scipy.special import softmax
from scipy.stats import norm

from utils.errors import DomainError

SIGMA_CONVENTIONS = ("linear", "squared")
SIGMA_CONVENTION_ALIASES = {"source": "linear", "paper": "squared"}
ODDS_READINGS = ("repaired", "inverse_n")
ODDS_READING_ALIASES = {"paper": "inverse_n"}
SCHEMES = ("frequentist", "bayesian", "uniform")


@dataclass
class WeightedAverage:
    """Averaged effect with its weights and interval.

    ``sigma`` is the aggregate scale entering the interval. For Bayesian
    averages ``variance`` holds the posterior variance and ``sample_size``
    the weighted sample size the interval is scaled by.
    """

    estimate: float
    weights: np.ndarray
    sigma: float
    n_paths: int
    alpha: float
    lower: float
    upper: float
    scheme: str
    convention: Optional[str] = None
    variance: Optional[float] = None
    sample_size: Optional[float] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def effective_paths(self) -> float:
        """1 / sum(w^2), equal to the path count under uniform weights."""
        return float(1.0 / np.sum(self.weights ** 2))

    def to_dict(self) -> Dict[str, Any]:
        quantiles = np.quantile(self.weights, [0.0, 0.25, 0.5, 0.75, 1.0])
        return {
            "scheme": self.scheme,
            "estimate": self.estimate,
            "sigma": self.sigma,
            "variance": self.variance,
            "sample_size": self.sample_size,
            "n_paths": self.n_paths,
            "alpha": self.alpha,
            "interval": [self.lower, self.upper],
            "sigma_convention": self.convention,
            "weights_summary": {
                "min": float(quantiles[0]),
                "q25": float(quantiles[1]),
                "median": float(quantiles[2]),
                "q75": float(quantiles[3]),
                "max": float(quantiles[4]),
                "effective_paths": self.effective_paths,
            },
            **self.extra,
        }


def _as_vector(values, name: str) -> np.ndarray:
    vector = np.asarray(values, dtype=float).ravel()
    if vector.size == 0:
        raise DomainError(f"{name} is empty")
    if not np.isfinite(vector).all():
        raise DomainError(f"{name} contains missing or infinite values")
    return vector


def frequentist_weights(aics) -> np.ndarray:
    """w_p proportional to exp(-(AIC_p - min AIC)/2), summing to one."""
    aics = _as_vector(aics, "AIC vector")
    return softmax(-(aics - aics.min()) / 2.0)


def uniform_weights(n_paths: int) -> np.ndarray:
    if n_paths < 1:
        raise DomainError("Need at least one path")
    return np.full(n_paths, 1.0 / n_paths)


def resolve_sigma_convention(convention: str) -> str:
    """Canonical convention name; "source" and "paper" are accepted as aliases."""
    resolved = SIGMA_CONVENTION_ALIASES.get(convention, convention)
    if resolved not in SIGMA_CONVENTIONS:
        raise DomainError(f"Unknown sigma convention '{convention}', expected one of "
                          f"{SIGMA_CONVENTIONS + tuple(SIGMA_CONVENTION_ALIASES)}")
    return resolved


def resolve_odds_reading(reading: str) -> str:
    resolved = ODDS_READING_ALIASES.get(reading, reading)
    if resolved not in ODDS_READINGS:
        raise DomainError(f"Unknown odds reading '{reading}', expected one of "
                          f"{ODDS_READINGS + tuple(ODDS_READING_ALIASES)}")
    return resolved


def aggregate_sigma(estimates, standard_errors, weights, center: Optional[float] = None,
                    convention: str = "linear") -> float:
    """Aggregate standard error under perfect correlation between paths

    sum_p w_p sqrt(se_p^2 + (b* - b_p)^2), or its square under the "squared"
    convention.
    """
    convention = resolve_sigma_convention(convention)
    b = _as_vector(estimates, "Estimates")
    se = _as_vector(standard_errors, "Standard errors")
    w = _as_vector(weights, "Weights")
    if not (b.size == se.size == w.size):
        raise DomainError("Estimates, standard errors and weights must have the same length")
    if (se < 0).any():
        raise DomainError("Standard errors must be non-negative")
    if center is None:
        center = float(w @ b)
    value = float(w @ np.sqrt(se ** 2 + (center - b) ** 2))
    return value ** 2 if convention == "squared" else value


def normal_multiplier(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"Alpha must lie in (0, 1), got {alpha}")
    return float(norm.ppf(1.0 - alpha / 2.0))


def confidence_interval(estimate: float, sigma: float, n_paths: int, alpha: float = 0.05):
    """b* -/+ c_{alpha/2} sigma / sqrt(P)."""
    if n_paths < 1:
        raise DomainError(f"Path count must be at least 1, got {n_paths}")
    half_width = normal_multiplier(alpha) * sigma / np.sqrt(n_paths)
    return estimate - half_width, estimate + half_width


def weighted_average(estimates, standard_errors, weights, alpha: float = 0.05,
                     convention: str = "linear", scheme: str = "frequentist") -> WeightedAverage:
    b = _as_vector(estimates, "Estimates")
    w = _as_vector(weights, "Weights")
    if (w < 0).any():
        raise DomainError("Weights must be non-negative")
    convention = resolve_sigma_convention(convention)
    w = w / w.sum()
    estimate = float(w @ b)
    sigma = aggregate_sigma(b, standard_errors, w, estimate, convention)
    lower, upper = confidence_interval(estimate, sigma, b.size, alpha)
    return WeightedAverage(estimate, w, sigma, b.size, alpha, lower, upper, scheme, convention)


def frequentist_average(estimates, standard_errors, aics, alpha: float = 0.05,
                        convention: str = "linear") -> WeightedAverage:
    return weighted_average(estimates, standard_errors, frequentist_weights(aics), alpha, convention,
                            "frequentist")


def uniform_average(estimates, standard_errors, alpha: float = 0.05,
                    convention: str = "linear") -> WeightedAverage:
    b = _as_vector(estimates, "Estimates")
    return weighted_average(b, standard_errors, uniform_weights(b.size), alpha, convention, "uniform")


def tstat_average(tstats, weights=None) -> float:
    """Weighted mean of path t-statistics (uniform when no weights given)."""
    t = _as_vector(tstats, "t-statistics")
    w = uniform_weights(t.size) if weights is None else _as_vector(weights, "Weights")
    return float(w @ t / w.sum())


def log_marginal_likelihood(n, k, rss, yvar, reading: str = "repaired") -> np.ndarray:
    """Log of one model's share in the benchmark-prior Bayes factor

    repaired: (k/2) log(n/(n+1)) - ((n-1)/2) log((s + n v)/(n+1)) with n the
    observation count. inverse_n: the same with n replaced by 1/n inside the
    prior ratio and the residual term, the exponent keeping the count.
    """
    reading = resolve_odds_reading(reading)
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    s = np.asarray(rss, dtype=float)
    v = np.asarray(yvar, dtype=float)
    if (n <= 0).any() or not np.isfinite(n).all():
        raise DomainError("Observation counts must be positive")
    if (s < 0).any() or (v < 0).any():
        raise DomainError("Residual sums of squares and variances must be non-negative")
    g = n if reading == "repaired" else 1.0 / n
    return (k / 2.0) * np.log(g / (g + 1.0)) - ((n - 1.0) / 2.0) * np.log((s + g * v) / (g + 1.0))


def bayes_factor(model_j: Dict[str, float], model_p: Dict[str, float], reading: str = "repaired") -> float:
    """l_D(M_j) / l_D(M_p) for two fits carrying n, k, rss and yvar."""
    keys = ("n", "k", "rss", "yvar")
    missing = [key for key in keys if key not in model_j or key not in model_p]
    if missing:
        raise DomainError(f"Models must carry {keys}, missing {sorted(set(missing))}")
    log_j = log_marginal_likelihood(*(model_j[key] for key in keys), reading=reading)
    log_p = log_marginal_likelihood(*(model_p[key] for key in keys), reading=reading)
    return float(np.exp(log_j - log_p))


def posterior_probabilities(n, k, rss, yvar, reading: str = "repaired") -> np.ndarray:
    """Posterior model probabilities under unit prior odds."""
    return softmax(log_marginal_likelihood(n, k, rss, yvar, reading))


def bayesian_average(estimates, standard_errors, n, k, rss, yvar, alpha: float = 0.05,
                     reading: str = "repaired") -> WeightedAverage:
    """Posterior mean and variance of the effect across models

    Interval E -/+ c_{alpha/2} sqrt(V / T*) with T* the posterior-weighted
    sample size.
    """
    reading = resolve_odds_reading(reading)
    b = _as_vector(estimates, "Estimates")
    se = _as_vector(standard_errors, "Standard errors")
    if b.size != se.size:
        raise DomainError("Estimates and standard errors must have the same length")
    probabilities = posterior_probabilities(n, k, rss, yvar, reading)
    if probabilities.size != b.size:
        raise DomainError("Model statistics must have one entry per estimate")
    mean = float(probabilities @ b)
    variance = max(float(probabilities @ (se ** 2 + b ** 2)) - mean ** 2, 0.0)
    sample_size = float(probabilities @ np.asarray(n, dtype=float))
    half_width = normal_multiplier(alpha) * np.sqrt(variance / sample_size)
    return WeightedAverage(mean, probabilities, float(np.sqrt(variance)), b.size, alpha,
                           mean - half_width, mean + half_width, "bayesian",
                           variance=variance, sample_size=sample_size, extra={"odds_reading": reading})
