"""Monte Carlo enrollment simulation over superposed per-site Poisson processes.

Each site enrolls as an independent homogeneous Poisson process from its
opening month; a replicate realizes a site schedule, draws one accrual rate,
and samples arrivals. Sites are sampled from substreams keyed by replicate,
country, and purpose, so adding a site to a scenario leaves every existing
site's draws untouched (common random numbers across what-if scenarios) and
replicates are independent of execution order and worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from .accrual import sample_psm
from .activation import project_activation
from .domain import (
    AccrualModel,
    CountryActivationProfile,
    ForecastSummary,
    ReplicateOutcome,
    Scenario,
    SiteSchedule,
)
from .streams import RandomStream, bound_generator

__all__ = ["exposure", "simulate_replicate", "forecast", "summarize_forecast"]


def exposure(u1: float, u2: float, u_open: float) -> float:
    """Open-site time within [u1, u2] for a site opening at u_open.

    max(u2, u_open) - max(u1, u_open): the length of [u1, u2] intersected
    with [u_open, infinity).
    """
    if u1 > u2:
        raise ValueError(f"exposure window reversed: u1 {u1} > u2 {u2}")
    return max(u2, u_open) - max(u1, u_open)


def simulate_replicate(
    schedule: SiteSchedule,
    psm: float,
    target: int,
    horizon: float,
    stream: RandomStream,
) -> ReplicateOutcome:
    """Sample one replicate of subject arrivals over a realized site schedule.

    Each site is a homogeneous piece on [open_month, horizon]: its arrival
    count is Poisson(psm x exposure) and the arrivals are uniform within the
    piece, which is exact; the superposition over sites reproduces the
    piecewise-constant total intensity psm x (open sites). Counts and
    positions come from substreams keyed by country so the draws for a given
    site never depend on how many sites follow it.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    if target < 1:
        raise ValueError(f"target must be >= 1, got {target}")
    if psm < 0:
        raise ValueError(f"psm must be >= 0, got {psm}")

    chunks = []
    for country, opens_list in schedule.opens_by_country().items():
        opens = np.asarray(opens_list, dtype=float)
        lengths = np.maximum(horizon - opens, 0.0)
        counts = bound_generator(stream.child("count", country)).poisson(psm * lengths)
        total = int(counts.sum())
        if total == 0:
            continue
        positions = bound_generator(stream.child("pos", country)).random(total)
        chunks.append(np.repeat(opens, counts) + positions * np.repeat(lengths, counts))

    arrivals = np.sort(np.concatenate(chunks)) if chunks else np.empty(0)

    n_months = math.ceil(horizon)
    month_ends = np.minimum(np.arange(1, n_months + 1, dtype=float), horizon)
    monthly = np.searchsorted(arrivals, month_ends, side="right")

    return ReplicateOutcome(
        fsfd_month=float(arrivals[0]) if arrivals.size else None,
        lsfd_month=float(arrivals[target - 1]) if arrivals.size >= target else None,
        total_enrolled=int(arrivals.size),
        monthly_cumulative=tuple(monthly.tolist()),
    )


def forecast(
    scenario: Scenario,
    profiles: Sequence[CountryActivationProfile],
    model: Optional[AccrualModel] = None,
    keep_schedules: bool = False,
    n_threads: int = 1,
) -> tuple[list[ReplicateOutcome], Optional[list[SiteSchedule]]]:
    """Run the replicate loop: site activation, rate draw, subject enrollment.

    Per replicate b, a child stream of (scenario.seed, b) drives the
    country schedules (scenario.mode), the accrual-rate draw (sampled in
    perturbed/poisson mode, the point estimate in fixed mode, or
    psm_override verbatim), and the arrival simulation. Outcomes are ordered
    by replicate index and identical for any n_threads.
    """
    profile_map = {p.country: p for p in profiles}
    missing = [c for c, _ in scenario.countries if c not in profile_map]
    if missing:
        raise ValueError(f"scenario countries missing from profiles: {', '.join(missing)}")
    if model is None and scenario.psm_override is None:
        raise ValueError("forecast requires an accrual model unless psm_override is set")
    if n_threads < 1:
        raise ValueError(f"n_threads must be >= 1, got {n_threads}")

    root = RandomStream(scenario.seed)

    def run(b: int) -> tuple[ReplicateOutcome, SiteSchedule]:
        rep = root.child("replicate", b)
        if scenario.psm_override is not None:
            psm = scenario.psm_override
        elif scenario.mode == "fixed":
            psm = model.psm
        else:
            psm = sample_psm(model, bound_generator(rep.child("psm")))
        entries = []
        for country, n_sites in scenario.countries:
            opens = project_activation(
                profile_map[country], n_sites, scenario.mode,
                bound_generator(rep.child("open", country)),
            )
            entries.extend((country, j + 1, float(u)) for j, u in enumerate(opens))
        schedule = SiteSchedule(tuple(entries))
        outcome = simulate_replicate(
            schedule, psm, scenario.target_enrollment,
            scenario.horizon_months, rep.child("arrivals"),
        )
        return outcome, schedule

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(run, range(scenario.replicates)))
    else:
        results = [run(b) for b in range(scenario.replicates)]

    outcomes = [outcome for outcome, _ in results]
    schedules = [schedule for _, schedule in results] if keep_schedules else None
    return outcomes, schedules


def _interp_quantile(sorted_vals: np.ndarray, q: float) -> float:
    """Linear interpolation between order statistics, +inf aware."""
    pos = q * (sorted_vals.size - 1)
    lo = math.floor(pos)
    g = pos - lo
    if g == 0.0:
        return float(sorted_vals[lo])
    return float((1.0 - g) * sorted_vals[lo] + g * sorted_vals[lo + 1])


def summarize_forecast(
    replicates: Sequence[ReplicateOutcome],
    pi_level: float,
) -> ForecastSummary:
    """Point prediction, prediction interval, and curve quantiles over replicates.

    Censored replicates enter the duration quantiles as +inf, so a censored
    upper quantile surfaces as an absent bound; the point prediction is the
    median of uncensored durations, absent when the majority are censored.
    """
    if not replicates:
        raise ValueError("summarize_forecast requires at least one replicate")
    if not 0 < pi_level < 1:
        raise ValueError(f"pi_level must be in (0, 1), got {pi_level}")

    q_low = (1.0 - pi_level) / 2.0
    q_high = 1.0 - q_low

    lsfd = np.array([r.lsfd_month if r.lsfd_month is not None else np.inf for r in replicates])
    fsfd = np.array([r.fsfd_month if r.fsfd_month is not None else np.inf for r in replicates])

    def censored_median(values: np.ndarray) -> Optional[float]:
        infinite = np.isinf(values)
        if infinite.mean() > 0.5:
            return None
        return float(np.median(values[~infinite]))

    def bound(sorted_vals: np.ndarray, q: float) -> Optional[float]:
        value = _interp_quantile(sorted_vals, q)
        return None if math.isinf(value) else value

    lsfd_sorted = np.sort(lsfd)
    fsfd_sorted = np.sort(fsfd)

    grid_sizes = {len(r.monthly_cumulative) for r in replicates}
    if len(grid_sizes) != 1:
        raise ValueError("replicates disagree on the monthly grid length")
    n_months = grid_sizes.pop()
    curve: tuple[tuple[float, float, float, float], ...] = ()
    if n_months:
        counts = np.array([r.monthly_cumulative for r in replicates], dtype=float)
        qs = np.quantile(counts, [q_low, 0.5, q_high], axis=0)
        curve = tuple(
            (float(m + 1), float(qs[0, m]), float(qs[1, m]), float(qs[2, m]))
            for m in range(n_months)
        )

    return ForecastSummary(
        point_months=censored_median(lsfd),
        pi_low_months=bound(lsfd_sorted, q_low),
        pi_high_months=bound(lsfd_sorted, q_high),
        fsfd_point=censored_median(fsfd),
        fsfd_pi_low=bound(fsfd_sorted, q_low),
        fsfd_pi_high=bound(fsfd_sorted, q_high),
        censored_fraction=float(np.isinf(lsfd).mean()),
        curve=curve,
        pi_level=pi_level,
    )
