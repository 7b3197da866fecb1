"""Linear-model kernels: OLS, Newey-West HAC, predictive regressions."""

from regression.ols import RegressionResult, default_hac_lag, newey_west_se, ols
from regression.post_treatment import apply_post_treatment, get_post_treatment, register_post_treatment
from regression.predictive import (
    amihud_corrected_delta,
    ar1_coefficient,
    augmented_predictive,
    lead_sum,
    predictive_ols,
)

__all__ = [
    "RegressionResult",
    "amihud_corrected_delta",
    "apply_post_treatment",
    "ar1_coefficient",
    "augmented_predictive",
    "default_hac_lag",
    "get_post_treatment",
    "lead_sum",
    "newey_west_se",
    "ols",
    "predictive_ols",
    "register_post_treatment",
]
