"""Subject accrual-rate estimation: offsets, quasi-Poisson fit, rate sampling."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .domain import AccrualModel, HistoricalStudy

__all__ = ["compute_offset", "fit_accrual", "fit_intercept_irls", "sample_psm"]


def compute_offset(study: HistoricalStudy) -> float:
    """Site-month exposure d for one historical study.

    Sums n_sites x (duration - open_month) over site groups; a group with an
    unknown opening month contributes the full-duration approximation. A
    pre-computed offset_override takes precedence over the groups.
    """
    if study.offset_override is not None:
        return study.offset_override
    total = 0.0
    for group in study.site_groups:
        open_month = group.group_open_month if group.group_open_month is not None else 0.0
        exposure = study.duration_months - open_month
        if exposure <= 0:
            raise ValueError(
                f"study {study.study_id}, country {group.country}: "
                f"group_open_month {open_month} leaves non-positive exposure"
            )
        total += group.n_sites * exposure
    return total


def fit_intercept_irls(
    counts: Sequence[float],
    offsets: Sequence[float],
    tol: float = 1e-12,
    max_iter: int = 100,
) -> float:
    """Intercept of the log-link count model by iteratively reweighted least squares.

    Working response z = eta + (x - lam)/lam with weights lam, regressed on a
    column of ones with log(offset) held fixed. Used as the independent
    cross-check of the closed-form intercept.
    """
    x = np.asarray(counts, dtype=float)
    d = np.asarray(offsets, dtype=float)
    if np.any(d <= 0):
        raise ValueError("offsets must be strictly positive")
    log_d = np.log(d)
    # standard GLM start: fitted values from the observed counts (bumped off 0)
    lam = np.maximum(x, 0.1)
    eta = np.log(lam)
    mu = float(np.sum(lam * (eta - log_d)) / np.sum(lam))
    for _ in range(max_iter):
        eta = log_d + mu
        lam = np.exp(eta)
        z = eta + (x - lam) / lam
        mu_new = float(np.sum(lam * (z - log_d)) / np.sum(lam))
        if abs(mu_new - mu) < tol:
            return mu_new
        mu = mu_new
    return mu


def fit_accrual(
    studies: Sequence[HistoricalStudy],
    dispersion_floor: float = 1.0,
) -> AccrualModel:
    """Fit the intercept-only quasi-Poisson accrual model with site-month offsets.

    The intercept is the closed-form maximizer log(sum X / sum d); dispersion
    is the Pearson statistic over S - 1 degrees of freedom, clamped below at
    dispersion_floor (and set to the floor when S = 1) so rate sampling never
    narrows below pure-Poisson uncertainty. Floor 0 disables the clamp for
    exact-replication use.
    """
    if not studies:
        raise ValueError("fit_accrual requires at least one study")
    if dispersion_floor < 0:
        raise ValueError(f"dispersion_floor must be >= 0, got {dispersion_floor}")

    counts = np.array([s.n_subjects for s in studies], dtype=float)
    offsets = np.empty(len(studies))
    for i, study in enumerate(studies):
        d = compute_offset(study)
        if d <= 0:
            raise ValueError(f"study {study.study_id}: offset {d} must be > 0")
        offsets[i] = d
    total_subjects = counts.sum()
    if total_subjects <= 0:
        raise ValueError("cannot fit a positive accrual rate: total subject count is 0")

    intercept = float(np.log(total_subjects / offsets.sum()))
    irls = fit_intercept_irls(counts, offsets)
    assert abs(intercept - irls) < 1e-8, (
        f"closed-form intercept {intercept} disagrees with IRLS {irls}"
    )

    fitted = offsets * math.exp(intercept)
    n = len(studies)
    if n == 1:
        dispersion = dispersion_floor
    else:
        pearson = float(np.sum((counts - fitted) ** 2 / fitted))
        dispersion = max(pearson / (n - 1), dispersion_floor)
    if dispersion == 0:
        # floor disabled with nothing to estimate (S = 1) or a perfect fit;
        # keep the model constructible with effectively zero rate uncertainty
        dispersion = np.finfo(float).tiny
    intercept_se = math.sqrt(dispersion / fitted.sum())

    return AccrualModel(
        intercept=intercept,
        intercept_se=intercept_se,
        dispersion=dispersion,
        psm=math.exp(intercept),
        n_studies_fit=n,
    )


def sample_psm(model: AccrualModel, rng: np.random.Generator) -> float:
    """One Monte Carlo draw of the accrual rate: exp of N(intercept, intercept_se^2)."""
    return float(np.exp(rng.normal(model.intercept, model.intercept_se)))
