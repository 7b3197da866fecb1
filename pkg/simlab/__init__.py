"""Monte-Carlo lab for path correlation and empirical-cdf convergence."""

from simlab.config import DgpConfig, SimlabConfig, SweepConfig, load_simlab_config
from simlab.dgp import (
    SimulatedPaths,
    distance_matrix,
    estimate_sd,
    implied_correlation,
    noise_correlation,
    simulate_paths,
    simulate_worlds,
    synthetic_anomaly_returns,
    synthetic_path_samples,
)
from simlab.convergence import (
    ConvergenceResult,
    convergence_diagnostic,
    convergence_sweep,
    correlated_gaussians,
    grid_spec,
    layer_factor,
)
