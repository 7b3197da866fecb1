"""Hacking intervals, ease-to-confirm scoring and p-curve triage."""

from pathmetrics.intervals import (
    HackingIntervalReport,
    IntervalSlice,
    fit_power_law,
    growth_rates,
    hacking_interval_report,
    hacking_intervals,
)
from pathmetrics.etc import FITS, EtCReport, etc_from_probability, etc_score, ofo_from_probability
from pathmetrics.pcurve import (
    PCurveReport,
    classify_kappa,
    histogram_violations,
    kappa_from_counts,
    p_values_from_t,
    pcurve_report,
)
