import pytest

from enrollcast import ActivationRecord, HistoricalStudy, SiteGroup, estimate_profiles, fit_accrual


@pytest.fixture
def history():
    """A small two-country history: studies for the accrual fit, activation records."""
    studies = [
        HistoricalStudy("H1", 120, 12.0, (SiteGroup("US", 10, 1.0), SiteGroup("DE", 6, 3.0))),
        HistoricalStudy("H2", 90, 10.0, (SiteGroup("US", 8, 2.0), SiteGroup("DE", 5, 4.0))),
        HistoricalStudy("H3", 150, 15.0, (SiteGroup("US", 12, 1.5), SiteGroup("DE", 7, 2.5))),
    ]
    records = [
        ActivationRecord("H1", "US", (1.0, 1.5, 2.0, 3.0)),
        ActivationRecord("H2", "US", (2.0, 2.6, 4.0)),
        ActivationRecord("H3", "US", (1.5, 2.5, 3.5, 5.0)),
        ActivationRecord("H1", "DE", (3.0, 4.0, 6.0)),
        ActivationRecord("H2", "DE", (4.0, 5.5)),
        ActivationRecord("H3", "DE", (2.5, 3.5, 4.0)),
    ]
    return studies, records


@pytest.fixture
def fitted(history):
    studies, records = history
    return fit_accrual(studies), estimate_profiles(records)
