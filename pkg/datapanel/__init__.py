"""Time-indexed data panels, preparation transforms and CSV ingestion."""

from datapanel.panel import DataPanel, TransformReport
from datapanel.transforms import (
    cumulative_sum,
    difference,
    drop_missing_rows,
    impute_forward,
    scale_dependent,
    standardize,
    winsorize,
    winsorize_fraction,
)
from datapanel.lipschitz import (
    BoundSuiteResult,
    compose_bound,
    lipschitz_bound,
    lipschitz_ratio,
    run_bound_suite,
    run_chain_suite,
)

__all__ = [
    "BoundSuiteResult",
    "DataPanel",
    "TransformReport",
    "compose_bound",
    "cumulative_sum",
    "difference",
    "drop_missing_rows",
    "impute_forward",
    "lipschitz_bound",
    "lipschitz_ratio",
    "run_bound_suite",
    "run_chain_suite",
    "scale_dependent",
    "standardize",
    "winsorize",
    "winsorize_fraction",
]
