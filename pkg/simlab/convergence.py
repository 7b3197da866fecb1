"""
Convergence of the empirical cdf of correlated path outcomes.

Standardized outcomes with Cor = rho^d(p, q) are drawn through the
Kronecker structure of that matrix: one r_j x r_j factor per layer,
applied along the matching axis of an r_1 x ... x r_J Gaussian tensor.
The reported bound is 1/(4P) + mean |Cor| with the unknown constant set
to one.
"""

from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import norm

from pathgrid.combinatorics import sigma_norm
from pathgrid.grid import LayerSpec, StudySpec
from simlab.dgp import feasible_indices
from utils.errors import DomainError

GRID = np.linspace(-3.0, 3.0, 121)
SWEEP_KINDS = ("paths", "growing_J", "growing_r")
WORLD_CHUNK = 100


@dataclass(frozen=True)
class ConvergenceResult:
    n_layers: int
    n_options: str
    n_paths: int
    rho: float
    worlds: int
    sup_mse: float
    mc_se: float
    argmax: float
    bound_iid: float
    sigma_norm: float
    bound: float
    constant: float = 1.0

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def grid_spec(sizes: Sequence[int], study_id: str = "simulated") -> StudySpec:
    """Unconstrained grid with layers L1..LJ and options o1..or_j."""
    layers = tuple(LayerSpec(f"L{j + 1}", tuple(f"o{i + 1}" for i in range(r))) for j, r in enumerate(sizes))
    return StudySpec(layers, study_id=study_id)


def layer_factor(n_options: int, rho: float) -> np.ndarray:
    """Square root of the n x n matrix with unit diagonal and rho elsewhere."""
    matrix = np.full((n_options, n_options), rho, dtype=float)
    np.fill_diagonal(matrix, 1.0)
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    return eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))


def correlated_gaussians(sizes: Sequence[int], rho: float, rng: np.random.Generator, worlds: int = 1) -> np.ndarray:
    """worlds x P standard Gaussians with Cor(z_p, z_q) = rho^d(p, q), index order as the path grid."""
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    tensor = rng.standard_normal((worlds,) + tuple(sizes))
    for axis, r in enumerate(sizes, start=1):
        tensor = np.moveaxis(np.tensordot(layer_factor(r, rho), tensor, axes=([1], [axis])), 0, axis)
    return tensor.reshape(worlds, -1)


def _squared_cdf_errors(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """(Phi(x) - empirical cdf(x))^2 per world and grid point."""
    ordered = np.sort(samples, axis=1)
    n_paths = ordered.shape[1]
    empirical = np.stack([np.searchsorted(row, grid, side="right") for row in ordered]) / n_paths
    return (norm.cdf(grid)[None, :] - empirical) ** 2


def _chunk_errors(sizes, rho, indices, grid, seed, chunk, worlds) -> np.ndarray:
    rng = np.random.default_rng([seed, chunk])
    samples = correlated_gaussians(sizes, rho, rng, worlds)
    if indices is not None:
        samples = samples[:, indices]
    return _squared_cdf_errors(samples, grid)


def convergence_diagnostic(spec: StudySpec, rho: float, worlds: int = 1000, seed: int = 0,
                           grid: Optional[np.ndarray] = None, n_jobs: int = 1) -> ConvergenceResult:
    """sup over x of the across-world mean of (Phi(x) - Phi_hat_P(x))^2, with its bound."""
    if worlds < 2:
        raise DomainError(f"Need at least two worlds, got {worlds}")
    grid = GRID if grid is None else np.asarray(grid, dtype=float)
    indices = None if not spec.constraints else feasible_indices(spec)
    chunks = [(c, min(WORLD_CHUNK, worlds - c * WORLD_CHUNK)) for c in range((worlds + WORLD_CHUNK - 1) // WORLD_CHUNK)]
    parts = Parallel(n_jobs=n_jobs)(
        delayed(_chunk_errors)(spec.sizes, rho, indices, grid, seed, chunk, count) for chunk, count in chunks
    )
    errors = np.concatenate(parts)
    mse = errors.mean(axis=0)
    best = int(np.argmax(mse))
    n_paths = spec.n_paths if indices is None else int(indices.size)
    norm_value = sigma_norm(spec, rho)
    bound_iid = 1.0 / (4.0 * n_paths)
    return ConvergenceResult(
        n_layers=len(spec.sizes),
        n_options="x".join(str(r) for r in spec.sizes),
        n_paths=n_paths,
        rho=rho,
        worlds=worlds,
        sup_mse=float(mse[best]),
        mc_se=float(errors[:, best].std(ddof=1) / np.sqrt(worlds)),
        argmax=float(grid[best]),
        bound_iid=bound_iid,
        sigma_norm=norm_value,
        bound=bound_iid + norm_value,
    )


def sweep_specs(kind: str, values: Sequence[int], fixed: int = 2) -> List[StudySpec]:
    """Grids for a sweep: one layer of P options, J layers of ``fixed`` options, or ``fixed`` layers of r options."""
    if kind not in SWEEP_KINDS:
        raise DomainError(f"Unknown sweep kind '{kind}', expected one of {SWEEP_KINDS}")
    if kind == "paths":
        return [grid_spec([v]) for v in values]
    if kind == "growing_J":
        return [grid_spec([fixed] * v) for v in values]
    return [grid_spec([v] * fixed) for v in values]


def convergence_sweep(kind: str, values: Sequence[int], rho: float, worlds: int = 1000, seed: int = 0,
                      fixed: int = 2, n_jobs: int = 1, grid: Optional[np.ndarray] = None) -> pd.DataFrame:
    """One convergence row per grid in the sweep."""
    rows = []
    for spec in sweep_specs(kind, values, fixed):
        row = convergence_diagnostic(spec, rho, worlds, seed, grid=grid, n_jobs=n_jobs).to_dict()
        row["kind"] = kind
        rows.append(row)
    columns = ["kind", "n_layers", "n_options", "n_paths", "rho", "worlds", "sup_mse", "mc_se", "argmax",
               "bound_iid", "sigma_norm", "bound", "constant"]
    return pd.DataFrame(rows, columns=columns)
