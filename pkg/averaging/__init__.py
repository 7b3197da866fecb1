"""Model averaging over path outcomes and conditional layer tests."""

from averaging.weights import (
    ODDS_READINGS,
    SCHEMES,
    SIGMA_CONVENTIONS,
    WeightedAverage,
    aggregate_sigma,
    bayes_factor,
    bayesian_average,
    confidence_interval,
    frequentist_average,
    frequentist_weights,
    log_marginal_likelihood,
    normal_multiplier,
    posterior_probabilities,
    resolve_odds_reading,
    resolve_sigma_convention,
    tstat_average,
    uniform_average,
    uniform_weights,
    weighted_average,
)
from averaging.conditional import (
    ConditionalSplit,
    ConditionalTestReport,
    conditional_split,
    conditional_split_test,
    layer_impact_table,
    significance_stars,
    subset_weights,
)
