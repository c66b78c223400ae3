"""Site-activation estimation and schedule projection.

Estimates per-country start-up time and inter-site opening spacing from
historical activation records, then projects site-opening schedules in
fixed (deterministic), perturbed (paired bootstrap), or Poisson-process mode.
"""

from __future__ import annotations

import warnings
from statistics import median
from typing import Sequence

import numpy as np

from .domain import ActivationRecord, CountryActivationProfile

__all__ = ["estimate_profiles", "project_activation"]


def estimate_profiles(records: Sequence[ActivationRecord]) -> list[CountryActivationProfile]:
    """Per-country start-up and opening-pace profiles from activation records.

    For each (study, country): start-up t is the first activation month and
    the spacing is (last - first)/(n_sites - 1), undefined for single-site
    studies. t_hat is the median start-up over all studies; gap_hat the
    median of defined spacings. Single-site studies count toward t_hat but
    contribute no bootstrap pair. Even-length medians use the midpoint of
    the two central order statistics.
    """
    if not records:
        raise ValueError("estimate_profiles requires at least one activation record")

    by_country: dict[str, list[ActivationRecord]] = {}
    for record in records:
        by_country.setdefault(record.country, []).append(record)

    profiles = []
    for country, country_records in by_country.items():
        starts = []
        pairs = []
        for record in country_records:
            months = record.activation_months
            t = months[0]
            starts.append(t)
            if len(months) >= 2:
                gap = (months[-1] - months[0]) / (len(months) - 1)
                pairs.append((t, gap))
        if not pairs:
            raise ValueError(
                f"country {country}: every historical study has a single site, so no "
                f"opening pace can be estimated; supply a gap for {country} by "
                f"constructing its CountryActivationProfile directly"
            )
        profiles.append(
            CountryActivationProfile(
                country=country,
                t_hat=median(starts),
                gap_hat=median(g for _, g in pairs),
                pairs=tuple(pairs),
                n_studies=len(pairs),
            )
        )
    return profiles


def project_activation(
    profile: CountryActivationProfile,
    n_sites: int,
    mode: str,
    rng: np.random.Generator,
    bootstrap_start: bool = False,
) -> np.ndarray:
    """Opening months for n_sites sites in one country, sorted ascending.

    fixed: t_hat + (j-1) * gap_hat, deterministic.
    perturbed: one (t, gap) pair drawn uniformly with replacement from the
        historical pairs per call, then the linear projection with it.
    poisson: first site at the start-up time, later sites after exponential
        inter-arrival gaps with mean gap (a rate-1/gap homogeneous Poisson
        process). bootstrap_start swaps in one bootstrapped (t, gap) pair.
    """
    if n_sites < 1:
        raise ValueError(f"n_sites must be >= 1, got {n_sites}")

    if mode == "fixed":
        return profile.t_hat + profile.gap_hat * np.arange(n_sites, dtype=float)

    if mode == "perturbed":
        if not profile.pairs:
            raise ValueError(f"country {profile.country}: perturbed mode needs bootstrap pairs")
        if len(profile.pairs) == 1:
            warnings.warn(
                f"country {profile.country}: single historical study, perturbed mode "
                f"collapses to a fixed projection of that study's pair",
                stacklevel=2,
            )
        t, gap = profile.pairs[int(rng.integers(0, len(profile.pairs)))]
        return t + gap * np.arange(n_sites, dtype=float)

    if mode == "poisson":
        if bootstrap_start:
            if not profile.pairs:
                raise ValueError(f"country {profile.country}: bootstrap_start needs pairs")
            start, gap = profile.pairs[int(rng.integers(0, len(profile.pairs)))]
        else:
            start, gap = profile.t_hat, profile.gap_hat
        opens = np.empty(n_sites)
        opens[0] = start
        if n_sites > 1:
            opens[1:] = start + np.cumsum(rng.exponential(gap, size=n_sites - 1))
        return opens

    raise ValueError(f"unknown mode {mode!r}")
