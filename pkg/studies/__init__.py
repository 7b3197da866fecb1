"""Study executors, the executor registry and the outcome containers."""

from studies.anomalies_study import (
    AnomaliesStudy,
    anomaly_summary,
    characteristic_signs,
    default_return_matrix,
    period_comparison,
    run_anomalies_study,
    signed_outcomes,
)
from studies.base_study import BaseStudy
from studies.fmb_study import FmbStudy, run_fmb_study
from studies.outcomes import OUTCOME_COLUMNS, OutcomeSet, PathOutcome
from studies.premium_study import PremiumStudy, run_premium_study
from studies.study_manager import StudyManager, parse_data_arguments

__all__ = [
    "AnomaliesStudy",
    "BaseStudy",
    "FmbStudy",
    "OUTCOME_COLUMNS",
    "OutcomeSet",
    "PathOutcome",
    "PremiumStudy",
    "StudyManager",
    "anomaly_summary",
    "characteristic_signs",
    "default_return_matrix",
    "parse_data_arguments",
    "period_comparison",
    "run_anomalies_study",
    "run_fmb_study",
    "run_premium_study",
    "signed_outcomes",
]
