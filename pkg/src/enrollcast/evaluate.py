"""Per-study prediction diagnostics and study-set performance summaries."""

from __future__ import annotations

import math
from statistics import median
from typing import Sequence

from .domain import EvaluationRow, ForecastSummary, SummaryMetrics

__all__ = ["score_prediction", "evaluate_prediction", "summarize_rows"]

DEFAULT_WINDOWS = (1.0, 2.0, 3.0)


def score_prediction(
    study_id: str,
    actual_months: float,
    predicted_months: float,
    pi_low: float,
    pi_high: float,
    windows: Sequence[float] = DEFAULT_WINDOWS,
) -> EvaluationRow:
    """Build an EvaluationRow from raw prediction values.

    Comparisons run on full precision; window membership is strict
    (|error| < k), PI membership inclusive.
    """
    widths = tuple(float(w) for w in windows)
    if len(widths) != 3:
        raise ValueError(f"windows must list exactly three widths, got {len(widths)}")
    error = predicted_months - actual_months
    flags = tuple(abs(error) < w for w in widths)
    return EvaluationRow(
        study_id=study_id,
        actual_months=float(actual_months),
        predicted_months=float(predicted_months),
        prediction_error=error,
        pi_low=float(pi_low),
        pi_high=float(pi_high),
        within_pi=pi_low <= actual_months <= pi_high,
        within_1mo=flags[0],
        within_2mo=flags[1],
        within_3mo=flags[2],
        windows=widths,
    )


def evaluate_prediction(
    study_id: str,
    actual_months: float,
    summary: ForecastSummary,
    windows: Sequence[float] = DEFAULT_WINDOWS,
) -> EvaluationRow:
    """Score one forecast against the actual enrollment duration.

    Censored forecasts (absent point or PI bound) are rejected so they get
    reported rather than silently scored.
    """
    if summary.point_months is None or summary.pi_low_months is None \
            or summary.pi_high_months is None:
        raise ValueError(
            f"study {study_id}: forecast is censored "
            f"(censored_fraction={summary.censored_fraction:.3f}); "
            f"point and both PI bounds are required for scoring"
        )
    return score_prediction(
        study_id,
        actual_months,
        summary.point_months,
        summary.pi_low_months,
        summary.pi_high_months,
        windows,
    )


def summarize_rows(rows: Sequence[EvaluationRow]) -> SummaryMetrics:
    """Aggregate evaluation rows into the study-set performance summary.

    Medians use the midpoint rule on even counts; a +inf PI bound propagates
    into the length mean (reported as infinity, the "Inf" presentation).
    """
    if not rows:
        raise ValueError("summarize_rows requires at least one row")
    pi_lengths = [r.pi_high - r.pi_low for r in rows]
    errors = [r.prediction_error for r in rows]
    abs_errors = [abs(e) for e in errors]
    n = len(rows)
    # fsum keeps the means exactly permutation-invariant
    return SummaryMetrics(
        pi_length_median=median(pi_lengths),
        pi_length_mean=math.fsum(pi_lengths) / n,
        prediction_error_median=median(errors),
        abs_error_median=median(abs_errors),
        abs_error_mean=math.fsum(abs_errors) / n,
        coverage_pi=sum(r.within_pi for r in rows) / n,
        coverage_1mo=sum(r.within_1mo for r in rows) / n,
        coverage_2mo=sum(r.within_2mo for r in rows) / n,
        coverage_3mo=sum(r.within_3mo for r in rows) / n,
    )
