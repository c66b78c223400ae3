"""CSV ingestion, scenario/forecast JSON, and synthetic-history generation.

CSV schemas (header row, comma delimiter, '.' decimal separator, UTF-8,
months as decimals):

    studies.csv:            study_id,n_subjects,duration_months[,offset_override]
    study_site_groups.csv:  study_id,country,n_sites[,group_open_month]
    activations.csv:        study_id,country,activation_month   (one row per site)

Whether n_subjects counts screened or dosed subjects is the caller's
convention; be consistent between history and targets.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .domain import (
    ActivationRecord,
    ForecastSummary,
    HistoricalStudy,
    Scenario,
    SiteGroup,
    SummaryMetrics,
)

__all__ = [
    "DataError",
    "FieldError",
    "CountrySpec",
    "SyntheticConfig",
    "SyntheticTruth",
    "load_historical_studies",
    "load_activation_records",
    "write_historical_studies",
    "write_activation_records",
    "generate_synthetic_history",
    "scenario_from_dict",
    "scenario_to_dict",
    "summary_to_dict",
    "metrics_to_dict",
    "dump_json",
]


class DataError(ValueError):
    """A file failed validation; the message names file, line, and column."""


class FieldError(ValueError):
    """A JSON payload field failed validation."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _cell_error(path: Path, line: int, column: str, message: str) -> DataError:
    return DataError(f"{path}, line {line}, column {column}: {message}")


def _parse_float(raw: str, path: Path, line: int, column: str,
                 minimum: Optional[float] = None, strict_min: bool = False) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise _cell_error(path, line, column, f"not a number: {raw!r}") from None
    if not math.isfinite(value):
        raise _cell_error(path, line, column, f"not finite: {raw!r}")
    if minimum is not None and (value < minimum or (strict_min and value == minimum)):
        op = ">" if strict_min else ">="
        raise _cell_error(path, line, column, f"must be {op} {minimum}, got {value}")
    return value


def _parse_int(raw: str, path: Path, line: int, column: str, minimum: int) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise _cell_error(path, line, column, f"not an integer: {raw!r}") from None
    if value < minimum:
        raise _cell_error(path, line, column, f"must be >= {minimum}, got {value}")
    return value


def _open_reader(path: Path, required: Sequence[str], optional: Sequence[str] = ()):
    """Yield (line_number, row_dict) for a CSV file after header validation."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames
        if header is None:
            return  # empty file: no rows
        known = set(required) | set(optional)
        missing = [c for c in required if c not in header]
        if missing:
            raise DataError(f"{path}: missing required column(s) {', '.join(missing)}")
        unknown = [c for c in header if c not in known]
        if unknown:
            raise DataError(f"{path}: unknown column(s) {', '.join(unknown)}")
        for row in reader:
            if any(v is None for v in row.values()) or None in row:
                raise DataError(f"{path}, line {reader.line_num}: wrong number of fields")
            yield reader.line_num, row


def load_historical_studies(studies_path: str | Path,
                            site_groups_path: str | Path) -> list[HistoricalStudy]:
    """Load and join the studies and site-groups CSV files.

    One HistoricalStudy per distinct study_id, site groups joined by id and
    kept in file order; a groups row naming an unknown study is an error.
    """
    studies_path = Path(studies_path)
    site_groups_path = Path(site_groups_path)

    heads: dict[str, tuple[int, float, Optional[float]]] = {}
    for line, row in _open_reader(
        studies_path,
        required=("study_id", "n_subjects", "duration_months"),
        optional=("offset_override",),
    ):
        study_id = row["study_id"].strip()
        if not study_id:
            raise _cell_error(studies_path, line, "study_id", "empty")
        if study_id in heads:
            raise DataError(f"{studies_path}, line {line}: duplicate study_id {study_id!r}")
        n_subjects = _parse_int(row["n_subjects"], studies_path, line, "n_subjects", minimum=0)
        duration = _parse_float(row["duration_months"], studies_path, line,
                                "duration_months", minimum=0.0, strict_min=True)
        override_raw = (row.get("offset_override") or "").strip()
        override = None
        if override_raw:
            override = _parse_float(override_raw, studies_path, line,
                                    "offset_override", minimum=0.0)
        heads[study_id] = (n_subjects, duration, override)

    groups: dict[str, list[SiteGroup]] = {sid: [] for sid in heads}
    for line, row in _open_reader(
        site_groups_path,
        required=("study_id", "country", "n_sites"),
        optional=("group_open_month",),
    ):
        study_id = row["study_id"].strip()
        if study_id not in heads:
            raise DataError(
                f"{site_groups_path}, line {line}: study_id {study_id!r} "
                f"has no row in {studies_path}"
            )
        country = row["country"].strip()
        if not country:
            raise _cell_error(site_groups_path, line, "country", "empty")
        n_sites = _parse_int(row["n_sites"], site_groups_path, line, "n_sites", minimum=1)
        open_raw = (row.get("group_open_month") or "").strip()
        open_month = None
        if open_raw:
            open_month = _parse_float(open_raw, site_groups_path, line,
                                      "group_open_month", minimum=0.0)
        groups[study_id].append(SiteGroup(country, n_sites, open_month))

    studies = []
    for study_id, (n_subjects, duration, override) in heads.items():
        try:
            studies.append(HistoricalStudy(
                study_id=study_id,
                n_subjects=n_subjects,
                duration_months=duration,
                site_groups=tuple(groups[study_id]),
                offset_override=override,
            ))
        except ValueError as exc:
            raise DataError(f"{studies_path}: {exc}") from None
    return studies


def load_activation_records(path: str | Path) -> list[ActivationRecord]:
    """Load per-site activation months, grouped by (study, country) and sorted."""
    path = Path(path)
    months: dict[tuple[str, str], list[float]] = {}
    for line, row in _open_reader(
        path, required=("study_id", "country", "activation_month")
    ):
        study_id = row["study_id"].strip()
        country = row["country"].strip()
        if not study_id:
            raise _cell_error(path, line, "study_id", "empty")
        if not country:
            raise _cell_error(path, line, "country", "empty")
        month = _parse_float(row["activation_month"], path, line,
                             "activation_month", minimum=0.0)
        months.setdefault((study_id, country), []).append(month)
    return [
        ActivationRecord(study_id, country, tuple(sorted(values)))
        for (study_id, country), values in months.items()
    ]


def _format(value: float) -> str:
    return repr(float(value))


def write_historical_studies(studies: Sequence[HistoricalStudy],
                             studies_path: str | Path,
                             site_groups_path: str | Path) -> None:
    """Write studies back to the two CSV schemas (lossless round-trip)."""
    studies_path = Path(studies_path)
    site_groups_path = Path(site_groups_path)
    with_override = any(s.offset_override is not None for s in studies)
    with open(studies_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        header = ["study_id", "n_subjects", "duration_months"]
        if with_override:
            header.append("offset_override")
        writer.writerow(header)
        for s in studies:
            row = [s.study_id, s.n_subjects, _format(s.duration_months)]
            if with_override:
                row.append("" if s.offset_override is None else _format(s.offset_override))
            writer.writerow(row)
    with_open = any(g.group_open_month is not None for s in studies for g in s.site_groups)
    with open(site_groups_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        header = ["study_id", "country", "n_sites"]
        if with_open:
            header.append("group_open_month")
        writer.writerow(header)
        for s in studies:
            for g in s.site_groups:
                row = [s.study_id, g.country, g.n_sites]
                if with_open:
                    row.append("" if g.group_open_month is None else _format(g.group_open_month))
                writer.writerow(row)


def write_activation_records(records: Sequence[ActivationRecord],
                             path: str | Path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["study_id", "country", "activation_month"])
        for record in records:
            for month in record.activation_months:
                writer.writerow([record.study_id, record.country, _format(month)])


# ---------------------------------------------------------------------------
# Synthetic history with known ground truth

@dataclass(frozen=True)
class CountrySpec:
    """Ground-truth site-activation behavior for one synthetic country."""

    name: str
    t_mean: float
    gap_mean: float
    n_sites_range: tuple[int, int]

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("country name must be non-empty")
        if self.t_mean < 0:
            raise ValueError(f"t_mean must be >= 0, got {self.t_mean}")
        if self.gap_mean <= 0:
            raise ValueError(f"gap_mean must be > 0, got {self.gap_mean}")
        lo, hi = self.n_sites_range
        if not (1 <= lo <= hi):
            raise ValueError(f"n_sites_range must satisfy 1 <= lo <= hi, got {self.n_sites_range}")
        object.__setattr__(self, "n_sites_range", (int(lo), int(hi)))


@dataclass(frozen=True)
class SyntheticConfig:
    """Controls for the synthetic-history generator."""

    n_studies: int
    true_psm: float
    overdispersion: float
    countries: tuple[CountrySpec, ...]
    duration_range: tuple[float, float]
    seed: int
    t_jitter: float = 0.25
    gap_jitter: float = 0.25

    def __post_init__(self) -> None:
        if self.n_studies < 0:
            raise ValueError(f"n_studies must be >= 0, got {self.n_studies}")
        if self.true_psm <= 0:
            raise ValueError(f"true_psm must be > 0, got {self.true_psm}")
        if self.overdispersion < 1:
            raise ValueError(f"overdispersion must be >= 1, got {self.overdispersion}")
        object.__setattr__(self, "countries", tuple(self.countries))
        if not self.countries:
            raise ValueError("countries must be non-empty")
        lo, hi = self.duration_range
        if not (0 < lo <= hi):
            raise ValueError(f"duration_range must satisfy 0 < lo <= hi, got {self.duration_range}")
        object.__setattr__(self, "duration_range", (float(lo), float(hi)))
        if self.t_jitter < 0 or self.gap_jitter < 0:
            raise ValueError("jitters must be >= 0")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True)
class SyntheticTruth:
    """The parameters a generated bank was drawn from."""

    true_psm: float
    overdispersion: float
    countries: tuple[tuple[str, float, float], ...]  # (name, t_mean, gap_mean)


def _jitter(rng: np.random.Generator, cv: float, size: Optional[int] = None):
    """Multiplicative gamma noise with mean 1 and the given coefficient of variation."""
    if cv == 0:
        return 1.0 if size is None else np.ones(size)
    shape = 1.0 / cv**2
    return rng.gamma(shape, cv**2, size=size)


def _overdispersed_count(rng: np.random.Generator, mean: float, phi: float) -> int:
    """Count with the quasi-Poisson variance var = phi * mean (gamma-mixed Poisson)."""
    if mean == 0:
        return 0
    if phi == 1:
        return int(rng.poisson(mean))
    lam = rng.gamma(mean / (phi - 1.0), phi - 1.0)
    return int(rng.poisson(lam))


def generate_synthetic_history(
    config: SyntheticConfig,
) -> tuple[list[HistoricalStudy], list[ActivationRecord], SyntheticTruth]:
    """Generate a study bank with known accrual rate and activation behavior.

    Country start-ups scatter around t_mean and site openings around
    gap_mean spacing (gamma jitter); subject counts are gamma-mixed Poisson
    with mean true_psm x realized site-months and variance overdispersion x
    mean. Each study records its exact realized site-month exposure as
    offset_override so estimator-recovery tests are free of approximation
    bias. Deterministic given the config seed.
    """
    rng = np.random.default_rng(config.seed)
    studies: list[HistoricalStudy] = []
    records: list[ActivationRecord] = []
    for i in range(config.n_studies):
        study_id = f"SYN{i + 1:04d}"
        duration = float(rng.uniform(*config.duration_range))
        groups = []
        exposure_total = 0.0
        for spec in config.countries:
            lo, hi = spec.n_sites_range
            n_sites = int(rng.integers(lo, hi + 1))
            start = float(spec.t_mean * _jitter(rng, config.t_jitter))
            opens = np.full(n_sites, start)
            if n_sites > 1:
                gaps = spec.gap_mean * _jitter(rng, config.gap_jitter, size=n_sites - 1)
                opens[1:] += np.cumsum(gaps)
            exposure_total += float(np.maximum(duration - opens, 0.0).sum())
            records.append(ActivationRecord(study_id, spec.name, tuple(opens.tolist())))
            groups.append(SiteGroup(
                spec.name, n_sites,
                group_open_month=start if start < duration else None,
            ))
        count = _overdispersed_count(rng, config.true_psm * exposure_total,
                                     config.overdispersion)
        studies.append(HistoricalStudy(
            study_id=study_id,
            n_subjects=count,
            duration_months=duration,
            site_groups=tuple(groups),
            offset_override=exposure_total,
        ))
    truth = SyntheticTruth(
        true_psm=config.true_psm,
        overdispersion=config.overdispersion,
        countries=tuple((c.name, c.t_mean, c.gap_mean) for c in config.countries),
    )
    return studies, records, truth


# ---------------------------------------------------------------------------
# Scenario / forecast JSON

def scenario_from_dict(data: dict) -> Scenario:
    """Validate a scenario payload field by field; raises FieldError."""
    if not isinstance(data, dict):
        raise FieldError("scenario", "payload must be a JSON object")
    known = {"countries", "target_enrollment", "replicates", "mode", "seed",
             "pi_level", "horizon_months", "psm_override"}
    for key in data:
        if key not in known:
            raise FieldError(key, "unknown field")
    for key in ("countries", "target_enrollment", "replicates", "mode", "seed"):
        if key not in data or data[key] is None:
            raise FieldError(key, "required")

    raw_countries = data["countries"]
    if not isinstance(raw_countries, list) or not raw_countries:
        raise FieldError("countries", "must be a non-empty list")
    countries = []
    for i, entry in enumerate(raw_countries):
        if not isinstance(entry, dict) or set(entry) != {"country", "n_sites"}:
            raise FieldError("countries",
                             f"entry {i} must be an object with country and n_sites")
        if not isinstance(entry["country"], str):
            raise FieldError("countries", f"entry {i}: country must be a string")
        if not isinstance(entry["n_sites"], int) or isinstance(entry["n_sites"], bool):
            raise FieldError("countries", f"entry {i}: n_sites must be an integer")
        countries.append((entry["country"], entry["n_sites"]))

    def _int_field(key: str) -> int:
        value = data[key]
        if not isinstance(value, int) or isinstance(value, bool):
            raise FieldError(key, f"must be an integer, got {value!r}")
        return value

    def _num_field(key: str, default: Optional[float]) -> Optional[float]:
        value = data.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise FieldError(key, f"must be a number, got {value!r}")
        return float(value)

    if not isinstance(data["mode"], str):
        raise FieldError("mode", f"must be a string, got {data['mode']!r}")

    fields = dict(
        countries=tuple(countries),
        target_enrollment=_int_field("target_enrollment"),
        replicates=_int_field("replicates"),
        mode=data["mode"],
        seed=_int_field("seed"),
        pi_level=_num_field("pi_level", 0.95),
        horizon_months=_num_field("horizon_months", 120.0),
        psm_override=_num_field("psm_override", None),
    )
    try:
        return Scenario(**fields)
    except ValueError as exc:
        message = str(exc)
        for key in ("countries", "target_enrollment", "replicates", "mode", "seed",
                    "pi_level", "horizon_months", "psm_override", "country"):
            if key in message:
                raise FieldError(key.replace("country", "countries"), message) from None
        raise FieldError("scenario", message) from None


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "countries": [{"country": c, "n_sites": n} for c, n in scenario.countries],
        "target_enrollment": scenario.target_enrollment,
        "replicates": scenario.replicates,
        "mode": scenario.mode,
        "seed": scenario.seed,
        "pi_level": scenario.pi_level,
        "horizon_months": scenario.horizon_months,
        "psm_override": scenario.psm_override,
    }


def summary_to_dict(summary: ForecastSummary) -> dict:
    return {
        "point_months": summary.point_months,
        "pi_low_months": summary.pi_low_months,
        "pi_high_months": summary.pi_high_months,
        "fsfd_point": summary.fsfd_point,
        "fsfd_pi_low": summary.fsfd_pi_low,
        "fsfd_pi_high": summary.fsfd_pi_high,
        "censored_fraction": summary.censored_fraction,
        "pi_level": summary.pi_level,
        "curve": [
            {"month": m, "q_low": ql, "q_median": qm, "q_high": qh}
            for m, ql, qm, qh in summary.curve
        ],
    }


def metrics_to_dict(metrics: SummaryMetrics) -> dict:
    """SummaryMetrics as JSON-safe dict; +inf means (censored bounds) become null."""
    def _safe(value: float) -> Optional[float]:
        return value if math.isfinite(value) else None
    return {
        "pi_length_median": _safe(metrics.pi_length_median),
        "pi_length_mean": _safe(metrics.pi_length_mean),
        "prediction_error_median": metrics.prediction_error_median,
        "abs_error_median": metrics.abs_error_median,
        "abs_error_mean": _safe(metrics.abs_error_mean),
        "coverage_pi": metrics.coverage_pi,
        "coverage_1mo": metrics.coverage_1mo,
        "coverage_2mo": metrics.coverage_2mo,
        "coverage_3mo": metrics.coverage_3mo,
    }


def dump_json(payload: dict, path: str | Path) -> None:
    """Pretty-printed, key-sorted JSON for diff-stable outputs."""
    with open(Path(path), "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, allow_nan=False)
        handle.write("\n")
