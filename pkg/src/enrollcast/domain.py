"""Domain types for study-level enrollment forecasting.

All types are immutable value objects; their invariants are enforced at
construction and violating inputs are rejected, never repaired. Times are
real-valued months from a per-study time zero (protocol approval).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

__all__ = [
    "MODES",
    "SiteGroup",
    "HistoricalStudy",
    "ActivationRecord",
    "CountryActivationProfile",
    "AccrualModel",
    "Scenario",
    "SiteSchedule",
    "ReplicateOutcome",
    "ForecastSummary",
    "EvaluationRow",
    "SummaryMetrics",
]

MODES = ("fixed", "perturbed", "poisson")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _finite(x: float, name: str) -> float:
    x = float(x)
    _require(math.isfinite(x), f"{name} must be finite, got {x}")
    return x


@dataclass(frozen=True)
class SiteGroup:
    """A block of sites in one country sharing an (approximate) opening month."""

    country: str
    n_sites: int
    group_open_month: Optional[float] = None

    def __post_init__(self) -> None:
        _require(bool(self.country), "country must be a non-empty string")
        _require(int(self.n_sites) == self.n_sites and self.n_sites >= 1,
                 f"n_sites must be a positive integer, got {self.n_sites}")
        if self.group_open_month is not None:
            open_month = _finite(self.group_open_month, "group_open_month")
            _require(open_month >= 0, f"group_open_month must be >= 0, got {open_month}")
            object.__setattr__(self, "group_open_month", open_month)


@dataclass(frozen=True)
class HistoricalStudy:
    """One study-level historical record: subjects, duration, and site mix."""

    study_id: str
    n_subjects: int
    duration_months: float
    site_groups: tuple[SiteGroup, ...] = ()
    offset_override: Optional[float] = None

    def __post_init__(self) -> None:
        _require(bool(self.study_id), "study_id must be a non-empty string")
        _require(int(self.n_subjects) == self.n_subjects and self.n_subjects >= 0,
                 f"n_subjects must be a non-negative integer, got {self.n_subjects}")
        duration = _finite(self.duration_months, "duration_months")
        _require(duration > 0, f"duration_months must be > 0, got {duration}")
        object.__setattr__(self, "duration_months", duration)
        object.__setattr__(self, "site_groups", tuple(self.site_groups))
        if self.offset_override is not None:
            override = _finite(self.offset_override, "offset_override")
            _require(override >= 0, f"offset_override must be >= 0, got {override}")
            object.__setattr__(self, "offset_override", override)
        _require(self.site_groups or self.offset_override is not None,
                 f"study {self.study_id}: site_groups empty and no offset_override")
        for group in self.site_groups:
            if group.group_open_month is not None:
                _require(group.group_open_month < duration,
                         f"study {self.study_id}, country {group.country}: "
                         f"group_open_month {group.group_open_month} >= duration {duration}")


@dataclass(frozen=True)
class ActivationRecord:
    """Per-site activation months for one (study, country), sorted ascending."""

    study_id: str
    country: str
    activation_months: tuple[float, ...]

    def __post_init__(self) -> None:
        _require(bool(self.study_id), "study_id must be a non-empty string")
        _require(bool(self.country), "country must be a non-empty string")
        months = tuple(_finite(m, "activation_month") for m in self.activation_months)
        _require(len(months) > 0, f"{self.study_id}/{self.country}: activation_months empty")
        _require(all(m >= 0 for m in months),
                 f"{self.study_id}/{self.country}: negative activation month")
        _require(all(a <= b for a, b in zip(months, months[1:])),
                 f"{self.study_id}/{self.country}: activation_months not sorted ascending")
        object.__setattr__(self, "activation_months", months)


@dataclass(frozen=True)
class CountryActivationProfile:
    """Per-country start-up and opening-pace estimates plus bootstrap pairs.

    gap_hat is the inter-site spacing in months per site; pairs holds the
    per-historical-study (start-up, spacing) tuples drawn by perturbed mode.
    """

    country: str
    t_hat: float
    gap_hat: float
    pairs: tuple[tuple[float, float], ...]
    n_studies: int

    def __post_init__(self) -> None:
        _require(bool(self.country), "country must be a non-empty string")
        t_hat = _finite(self.t_hat, "t_hat")
        gap_hat = _finite(self.gap_hat, "gap_hat")
        _require(t_hat >= 0, f"{self.country}: t_hat must be >= 0, got {t_hat}")
        _require(gap_hat > 0, f"{self.country}: gap_hat must be > 0, got {gap_hat}")
        pairs = tuple((_finite(t, "pair t"), _finite(g, "pair gap")) for t, g in self.pairs)
        _require(all(t >= 0 and g >= 0 for t, g in pairs),
                 f"{self.country}: bootstrap pairs must be non-negative")
        _require(len(pairs) == self.n_studies and self.n_studies >= 1,
                 f"{self.country}: pairs length {len(pairs)} != n_studies {self.n_studies} or < 1")
        object.__setattr__(self, "t_hat", t_hat)
        object.__setattr__(self, "gap_hat", gap_hat)
        object.__setattr__(self, "pairs", pairs)


@dataclass(frozen=True)
class AccrualModel:
    """Fitted intercept-only quasi-Poisson accrual model (log link, offset)."""

    intercept: float
    intercept_se: float
    dispersion: float
    psm: float
    n_studies_fit: int

    def __post_init__(self) -> None:
        intercept = _finite(self.intercept, "intercept")
        se = _finite(self.intercept_se, "intercept_se")
        dispersion = _finite(self.dispersion, "dispersion")
        psm = _finite(self.psm, "psm")
        _require(se >= 0, f"intercept_se must be >= 0, got {se}")
        _require(dispersion > 0, f"dispersion must be > 0, got {dispersion}")
        _require(psm > 0, f"psm must be > 0, got {psm}")
        _require(math.isclose(psm, math.exp(intercept), rel_tol=1e-12),
                 f"psm {psm} != exp(intercept) {math.exp(intercept)}")
        _require(self.n_studies_fit >= 1, "n_studies_fit must be >= 1")
        object.__setattr__(self, "intercept", intercept)
        object.__setattr__(self, "intercept_se", se)
        object.__setattr__(self, "dispersion", dispersion)
        object.__setattr__(self, "psm", psm)


@dataclass(frozen=True)
class Scenario:
    """The planning question: country/site mix, target, and simulation controls."""

    countries: tuple[tuple[str, int], ...]
    target_enrollment: int
    replicates: int
    mode: str
    seed: int
    pi_level: float = 0.95
    horizon_months: float = 120.0
    psm_override: Optional[float] = None

    def __post_init__(self) -> None:
        countries = tuple((str(c), int(n)) for c, n in self.countries)
        _require(len(countries) > 0, "countries must be non-empty")
        _require(all(c for c, _ in countries), "country names must be non-empty")
        _require(all(n >= 1 for _, n in countries),
                 "every country must plan at least one site")
        names = [c for c, _ in countries]
        _require(len(set(names)) == len(names),
                 f"duplicate country in scenario: {sorted(set(c for c in names if names.count(c) > 1))}")
        object.__setattr__(self, "countries", countries)
        _require(int(self.target_enrollment) == self.target_enrollment and self.target_enrollment >= 1,
                 f"target_enrollment must be a positive integer, got {self.target_enrollment}")
        _require(int(self.replicates) == self.replicates and self.replicates >= 1,
                 f"replicates must be >= 1, got {self.replicates}")
        _require(self.mode in MODES, f"mode must be one of {MODES}, got {self.mode!r}")
        _require(isinstance(self.seed, int) and not isinstance(self.seed, bool)
                 and 0 <= self.seed < 2**64,
                 f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        pi = _finite(self.pi_level, "pi_level")
        _require(0 < pi < 1, f"pi_level must be in (0, 1), got {pi}")
        object.__setattr__(self, "pi_level", pi)
        horizon = _finite(self.horizon_months, "horizon_months")
        _require(horizon > 0, f"horizon_months must be > 0, got {horizon}")
        object.__setattr__(self, "horizon_months", horizon)
        if self.psm_override is not None:
            override = _finite(self.psm_override, "psm_override")
            _require(override > 0, f"psm_override must be > 0, got {override}")
            object.__setattr__(self, "psm_override", override)

    @property
    def total_sites(self) -> int:
        return sum(n for _, n in self.countries)


@dataclass(frozen=True)
class SiteSchedule:
    """Realized site-opening months for one replicate: (country, site_index, open_month)."""

    entries: tuple[tuple[str, int, float], ...]

    def __post_init__(self) -> None:
        cleaned = []
        last: dict[str, tuple[int, float]] = {}
        isfinite = math.isfinite
        for country, j, m in self.entries:
            j = int(j)
            m = float(m)
            if not (isinstance(country, str) and country):
                raise ValueError(f"country must be a non-empty string, got {country!r}")
            if not isfinite(m) or m < 0:
                raise ValueError(f"{country}, site {j}: open_month must be finite and >= 0, got {m}")
            prev = last.get(country)
            if prev is None:
                if j != 1:
                    raise ValueError(f"{country}: first site_index must be 1, got {j}")
            else:
                # contiguous indices also rule out duplicate (country, site_index)
                if j != prev[0] + 1:
                    raise ValueError(f"{country}: site_index must increase by 1, got {prev[0]} -> {j}")
                if m < prev[1]:
                    raise ValueError(f"{country}: open_month decreases at site {j} ({prev[1]} -> {m})")
            last[country] = (j, m)
            cleaned.append((country, j, m))
        object.__setattr__(self, "entries", tuple(cleaned))

    def opens_by_country(self) -> dict[str, list[float]]:
        """Opening months grouped by country, in site-index order."""
        out: dict[str, list[float]] = {}
        for country, _, m in self.entries:
            out.setdefault(country, []).append(m)
        return out


@dataclass(frozen=True)
class ReplicateOutcome:
    """Outcome of one simulated replicate: arrival milestones and monthly curve."""

    fsfd_month: Optional[float]
    lsfd_month: Optional[float]
    total_enrolled: int
    monthly_cumulative: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.fsfd_month is not None:
            fsfd = _finite(self.fsfd_month, "fsfd_month")
            _require(fsfd >= 0, f"fsfd_month must be >= 0, got {fsfd}")
            object.__setattr__(self, "fsfd_month", fsfd)
        if self.lsfd_month is not None:
            lsfd = _finite(self.lsfd_month, "lsfd_month")
            _require(lsfd >= 0, f"lsfd_month must be >= 0, got {lsfd}")
            _require(self.fsfd_month is not None and self.fsfd_month <= lsfd,
                     "lsfd_month requires fsfd_month <= lsfd_month")
            object.__setattr__(self, "lsfd_month", lsfd)
        monthly = tuple(map(int, self.monthly_cumulative))
        _require(not monthly or monthly[0] >= 0, "monthly_cumulative must be non-negative")
        _require(all(a <= b for a, b in zip(monthly, monthly[1:])),
                 "monthly_cumulative must be non-decreasing")
        object.__setattr__(self, "monthly_cumulative", monthly)
        _require(int(self.total_enrolled) == self.total_enrolled and self.total_enrolled >= 0,
                 f"total_enrolled must be a non-negative integer, got {self.total_enrolled}")
        if monthly:
            _require(self.total_enrolled == monthly[-1],
                     f"total_enrolled {self.total_enrolled} != last monthly value {monthly[-1]}")
        else:
            _require(self.total_enrolled == 0,
                     "total_enrolled must be 0 when monthly_cumulative is empty")

    @property
    def censored(self) -> bool:
        return self.lsfd_month is None


@dataclass(frozen=True)
class ForecastSummary:
    """Summarized forecast: point prediction, PI, FSFD stats, and curve quantiles.

    None in a PI bound signals a censored (unbounded) quantile; curve rows
    are (month, q_low, q_median, q_high) cumulative-enrollment quantiles.
    """

    point_months: Optional[float]
    pi_low_months: Optional[float]
    pi_high_months: Optional[float]
    fsfd_point: Optional[float]
    fsfd_pi_low: Optional[float]
    fsfd_pi_high: Optional[float]
    censored_fraction: float
    curve: tuple[tuple[float, float, float, float], ...]
    pi_level: float = 0.95

    def __post_init__(self) -> None:
        frac = _finite(self.censored_fraction, "censored_fraction")
        _require(0.0 <= frac <= 1.0, f"censored_fraction must be in [0, 1], got {frac}")
        object.__setattr__(self, "censored_fraction", frac)
        pi = _finite(self.pi_level, "pi_level")
        _require(0 < pi < 1, f"pi_level must be in (0, 1), got {pi}")
        object.__setattr__(self, "pi_level", pi)
        for low, mid, high, label in (
            (self.pi_low_months, self.point_months, self.pi_high_months, "enrollment"),
            (self.fsfd_pi_low, self.fsfd_point, self.fsfd_pi_high, "fsfd"),
        ):
            if low is not None and mid is not None:
                _require(low <= mid, f"{label}: pi_low {low} > point {mid}")
            if mid is not None and high is not None:
                _require(mid <= high, f"{label}: point {mid} > pi_high {high}")
            if low is not None and high is not None:
                _require(low <= high, f"{label}: pi_low {low} > pi_high {high}")
        curve = tuple(
            (float(m), float(ql), float(qm), float(qh)) for m, ql, qm, qh in self.curve
        )
        for m, ql, qm, qh in curve:
            _require(ql <= qm <= qh, f"curve month {m}: quantiles not ordered ({ql}, {qm}, {qh})")
        object.__setattr__(self, "curve", curve)


@dataclass(frozen=True)
class EvaluationRow:
    """Per-study prediction diagnostics against the actual enrollment duration.

    Window membership is strict: within_k <=> |prediction_error| < k, which
    reproduces the published coverage columns from rounded table values.
    """

    study_id: str
    actual_months: float
    predicted_months: float
    prediction_error: float
    pi_low: float
    pi_high: float
    within_pi: bool
    within_1mo: bool
    within_2mo: bool
    within_3mo: bool
    windows: tuple[float, float, float] = (1.0, 2.0, 3.0)

    def __post_init__(self) -> None:
        _require(bool(self.study_id), "study_id must be a non-empty string")
        actual = _finite(self.actual_months, "actual_months")
        predicted = _finite(self.predicted_months, "predicted_months")
        err = _finite(self.prediction_error, "prediction_error")
        _require(math.isclose(err, predicted - actual, rel_tol=1e-9, abs_tol=1e-9),
                 f"prediction_error {err} != predicted - actual {predicted - actual}")
        low, high = float(self.pi_low), float(self.pi_high)
        _require(low <= high, f"pi_low {low} > pi_high {high}")
        _require(self.within_pi == (low <= actual <= high),
                 "within_pi inconsistent with PI bounds")
        windows = tuple(float(w) for w in self.windows)
        _require(len(windows) == 3 and all(w > 0 for w in windows),
                 "windows must be three positive widths")
        flags = (self.within_1mo, self.within_2mo, self.within_3mo)
        for flag, width in zip(flags, windows):
            _require(flag == (abs(err) < width),
                     f"within flag for +/-{width} month inconsistent with error {err}")
        object.__setattr__(self, "windows", windows)


@dataclass(frozen=True)
class SummaryMetrics:
    """Study-set summary of prediction performance (PI length, error, coverage)."""

    pi_length_median: float
    pi_length_mean: float
    prediction_error_median: float
    abs_error_median: float
    abs_error_mean: float
    coverage_pi: float
    coverage_1mo: float
    coverage_2mo: float
    coverage_3mo: float

    def __post_init__(self) -> None:
        _require(self.abs_error_median >= 0,
                 f"abs_error_median must be >= 0, got {self.abs_error_median}")
        for name in ("coverage_pi", "coverage_1mo", "coverage_2mo", "coverage_3mo"):
            value = getattr(self, name)
            _require(0.0 <= value <= 1.0, f"{name} must be in [0, 1], got {value}")
