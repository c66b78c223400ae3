"""Study-level clinical-trial enrollment forecasting.

Estimates subject accrual and site-activation parameters from study-level
history, simulates the two-layer Poisson process of site opening and subject
enrollment by Monte Carlo, and reports enrollment-duration predictions with
prediction intervals.
"""

from .accrual import compute_offset, fit_accrual, fit_intercept_irls, sample_psm
from .activation import estimate_profiles, project_activation
from .domain import (
    AccrualModel,
    ActivationRecord,
    CountryActivationProfile,
    EvaluationRow,
    ForecastSummary,
    HistoricalStudy,
    ReplicateOutcome,
    Scenario,
    SiteGroup,
    SiteSchedule,
    SummaryMetrics,
)
from .evaluate import evaluate_prediction, score_prediction, summarize_rows
from .simulate import exposure, forecast, simulate_replicate, summarize_forecast
from .streams import RandomStream

__version__ = "0.1.0"

__all__ = [
    "AccrualModel",
    "ActivationRecord",
    "CountryActivationProfile",
    "EvaluationRow",
    "ForecastSummary",
    "HistoricalStudy",
    "RandomStream",
    "ReplicateOutcome",
    "Scenario",
    "SiteGroup",
    "SiteSchedule",
    "SummaryMetrics",
    "compute_offset",
    "estimate_profiles",
    "evaluate_prediction",
    "exposure",
    "fit_accrual",
    "fit_intercept_irls",
    "forecast",
    "project_activation",
    "sample_psm",
    "score_prediction",
    "simulate_replicate",
    "summarize_forecast",
    "summarize_rows",
]
