"""
Contaminated data-generating process for forking paths.

Every path p estimates b_hat_p = b_bar + alpha_p b_tilde + (1 - alpha_p) e_p
where b_tilde ~ N(0, sigma_b^2) is shared by all paths and e_p is path
noise. The noise correlation is solved so that Cor(b_hat_p, b_hat_q)
equals rho^d(p, q).
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from pathgrid.grid import StudySpec
from regression.ols import ols
from simlab.config import DgpConfig
from utils.errors import DomainError

MAX_DENSE_PATHS = 5000
PSD_TOLERANCE = 1e-10


@dataclass
class SimulatedPaths:
    """One simulated world: per-path samples and their OLS estimates."""

    x: List[np.ndarray]
    y: List[np.ndarray]
    estimates: np.ndarray
    b_tilde: float
    noise: np.ndarray
    alpha: np.ndarray
    path_indices: np.ndarray


def _broadcast(value, n_paths: int, name: str) -> np.ndarray:
    values = np.atleast_1d(np.asarray(value, dtype=float))
    if values.size == 1:
        return np.full(n_paths, values[0])
    if values.size != n_paths:
        raise DomainError(f"{name} has {values.size} entries for {n_paths} paths")
    return values


def feasible_indices(spec: StudySpec) -> np.ndarray:
    if not spec.constraints:
        return np.arange(spec.n_paths)
    return np.array([i for i in range(spec.n_paths) if spec.is_feasible(spec.decode(i))], dtype=int)


def distance_matrix(spec: StudySpec, indices: Optional[np.ndarray] = None) -> np.ndarray:
    """Pairwise Hamming distances between paths (dense, P x P)."""
    indices = np.arange(spec.n_paths) if indices is None else np.asarray(indices)
    if indices.size > MAX_DENSE_PATHS:
        raise DomainError(f"Dense distances are limited to {MAX_DENSE_PATHS} paths, got {indices.size}")
    positions = np.stack(np.unravel_index(indices, spec.sizes), axis=1)
    return (positions[:, None, :] != positions[None, :, :]).sum(axis=2)


def estimate_sd(alpha, sigma_b: float, sigma_e: float) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    return np.sqrt(alpha ** 2 * sigma_b ** 2 + (1.0 - alpha) ** 2 * sigma_e ** 2)


def implied_correlation(alpha_p: float, alpha_q: float, noise_cor: float, sigma_b: float = 1.0,
                        sigma_e: float = 1.0) -> float:
    """Cor(b_hat_p, b_hat_q) given the correlation of the two noise terms.

    With sigma_b = sigma_e = 1 and normalized scales this is
    alpha_p alpha_q + (1 - alpha_p)(1 - alpha_q) Cor(e_p, e_q).
    """
    covariance = alpha_p * alpha_q * sigma_b ** 2 + (1 - alpha_p) * (1 - alpha_q) * sigma_e ** 2 * noise_cor
    scale = estimate_sd(alpha_p, sigma_b, sigma_e) * estimate_sd(alpha_q, sigma_b, sigma_e)
    return float(covariance / scale)


def noise_correlation(distances: np.ndarray, alpha: np.ndarray, rho: float, sigma_b: float,
                      sigma_e: float) -> np.ndarray:
    """Noise correlation making Cor(b_hat_p, b_hat_q) = rho^d; paths with alpha = 1 get identity rows."""
    alpha = np.asarray(alpha, dtype=float)
    s = estimate_sd(alpha, sigma_b, sigma_e)
    noisy = alpha < 1.0
    target = np.power(rho, distances, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        numerator = target * np.outer(s, s) - np.outer(alpha, alpha) * sigma_b ** 2
        matrix = numerator / (np.outer(1.0 - alpha, 1.0 - alpha) * sigma_e ** 2)
    matrix[~noisy, :] = 0.0
    matrix[:, ~noisy] = 0.0
    np.fill_diagonal(matrix, 1.0)
    smallest = float(np.linalg.eigvalsh(matrix).min())
    if smallest < -PSD_TOLERANCE:
        raise DomainError(f"Noise correlation implied by rho={rho} is not positive semi-definite "
                          f"(smallest eigenvalue {smallest:.3g})")
    return matrix


def _factor(matrix: np.ndarray) -> np.ndarray:
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    return eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))


def _noise_factor(config: DgpConfig, spec: StudySpec, indices: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    distances = distance_matrix(spec, indices)
    return config.sigma_e * _factor(noise_correlation(distances, alpha, config.rho, config.sigma_b, config.sigma_e))


def simulate_paths(config: DgpConfig, spec: StudySpec, world: int = 0) -> SimulatedPaths:
    """Samples (X_p, Y_p) whose OLS slope is exactly b_bar + alpha_p b_tilde + (1 - alpha_p) e_p."""
    indices = feasible_indices(spec)
    n_paths = indices.size
    alpha = _broadcast(config.alpha, n_paths, "alpha")
    lengths = _broadcast(config.n_obs, n_paths, "n_obs").astype(int)
    factor = _noise_factor(config, spec, indices, alpha)
    rng = np.random.default_rng([config.seed, world])

    b_tilde = float(config.sigma_b * rng.standard_normal())
    noise = factor @ rng.standard_normal(n_paths)
    xs, ys, estimates = [], [], np.empty(n_paths)
    for p in range(n_paths):
        x = rng.standard_normal(lengths[p])
        z = rng.standard_normal(lengths[p])
        z_orthogonal = z - x * (x @ z) / (x @ x)
        y = x * (config.b_bar + alpha[p] * b_tilde) + (1.0 - alpha[p]) * (x * noise[p] + z_orthogonal)
        estimates[p] = ols(x[:, None], y, has_intercept=False).coefficients[0]
        xs.append(x)
        ys.append(y)
    return SimulatedPaths(xs, ys, estimates, b_tilde, noise, alpha, indices)


def simulate_worlds(config: DgpConfig, spec: StudySpec, worlds: int) -> np.ndarray:
    """W x P path estimates drawn directly from the DGP, one seeded stream per world."""
    if worlds < 1:
        raise DomainError(f"Need at least one world, got {worlds}")
    indices = feasible_indices(spec)
    alpha = _broadcast(config.alpha, indices.size, "alpha")
    factor = _noise_factor(config, spec, indices, alpha)
    estimates = np.empty((worlds, indices.size))
    for w in range(worlds):
        rng = np.random.default_rng([config.seed, w])
        b_tilde = config.sigma_b * rng.standard_normal()
        noise = factor @ rng.standard_normal(indices.size)
        estimates[w] = config.b_bar + alpha * b_tilde + (1.0 - alpha) * noise
    return estimates


def synthetic_anomaly_returns(n_anomalies: int = 82, n_months: int = 240, mean: float = 0.005,
                              sd: float = 0.04, seed: int = 0) -> np.ndarray:
    """T x N iid Gaussian long-short returns."""
    rng = np.random.default_rng([seed, 0])
    return mean + sd * rng.standard_normal((n_months, n_anomalies))


def synthetic_path_samples(n_anomalies: int = 82, n_paths: int = 576, path_months: int = 120,
                           mean: float = 0.005, sd: float = 0.04, shift: float = 0.5, seed: int = 0) -> np.ndarray:
    """P x T_p x N returns whose per-path means move by N(0, (shift sd)^2) around ``mean``."""
    rng = np.random.default_rng([seed, 1])
    offsets = shift * sd * rng.standard_normal((n_paths, 1, n_anomalies))
    return mean + offsets + sd * rng.standard_normal((n_paths, path_months, n_anomalies))
