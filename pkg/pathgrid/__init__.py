"""Layered option grids, path enumeration and grid combinatorics."""

from pathgrid.grid import (
    Constraint,
    LayerSpec,
    PathAssignment,
    StudySpec,
    enumerate_paths,
    iter_paths,
    path_distance,
    robustness_paths,
    twin_index,
    weighted_path_distance,
)
from pathgrid.combinatorics import distance_census, elementary_symmetric, n_intervals, sigma_norm
from pathgrid.study_config import (
    StudyConfig,
    load_study_config,
    parse_study_config,
    spec_from_dict,
    spec_to_dict,
    study_config_schema,
)

__all__ = [
    "Constraint",
    "LayerSpec",
    "PathAssignment",
    "StudySpec",
    "StudyConfig",
    "distance_census",
    "elementary_symmetric",
    "enumerate_paths",
    "iter_paths",
    "load_study_config",
    "n_intervals",
    "parse_study_config",
    "path_distance",
    "robustness_paths",
    "sigma_norm",
    "spec_from_dict",
    "spec_to_dict",
    "study_config_schema",
    "twin_index",
    "weighted_path_distance",
]
