import dataclasses
import math

import pytest

from enrollcast import (
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


class TestHistoricalStudy:
    def test_valid(self):
        study = HistoricalStudy("S1", 100, 10.0, (SiteGroup("US", 50, 0.0),))
        assert study.duration_months == 10.0

    def test_rejects_zero_duration(self):
        with pytest.raises(ValueError, match="duration"):
            HistoricalStudy("S1", 100, 0.0, (SiteGroup("US", 5),))

    def test_rejects_negative_subjects(self):
        with pytest.raises(ValueError, match="n_subjects"):
            HistoricalStudy("S1", -1, 10.0, (SiteGroup("US", 5),))

    def test_rejects_no_groups_and_no_override(self):
        with pytest.raises(ValueError, match="offset_override"):
            HistoricalStudy("S1", 1, 10.0, ())

    def test_override_alone_is_fine(self):
        study = HistoricalStudy("S1", 1, 10.0, (), offset_override=123.4)
        assert study.offset_override == 123.4

    def test_rejects_group_open_at_or_past_duration(self):
        with pytest.raises(ValueError, match="group_open_month"):
            HistoricalStudy("S1", 1, 10.0, (SiteGroup("US", 5, 10.0),))

    def test_immutable(self):
        study = HistoricalStudy("S1", 1, 10.0, (SiteGroup("US", 5),))
        with pytest.raises(dataclasses.FrozenInstanceError):
            study.n_subjects = 7


class TestSiteGroup:
    def test_rejects_zero_sites(self):
        with pytest.raises(ValueError, match="n_sites"):
            SiteGroup("US", 0)

    def test_rejects_negative_open(self):
        with pytest.raises(ValueError, match="group_open_month"):
            SiteGroup("US", 3, -0.5)


class TestActivationRecord:
    def test_rejects_unsorted(self):
        with pytest.raises(ValueError, match="sorted"):
            ActivationRecord("K1", "US", (3.5, 2.0))

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="negative"):
            ActivationRecord("K1", "US", (-1.0, 2.0))

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="empty"):
            ActivationRecord("K1", "US", ())


class TestCountryActivationProfile:
    def test_rejects_pair_count_mismatch(self):
        with pytest.raises(ValueError, match="n_studies"):
            CountryActivationProfile("US", 2.0, 1.0, ((2.0, 1.0),), n_studies=2)

    def test_rejects_zero_gap_hat(self):
        with pytest.raises(ValueError, match="gap_hat"):
            CountryActivationProfile("US", 2.0, 0.0, ((2.0, 1.0),), n_studies=1)


class TestAccrualModel:
    def test_psm_must_equal_exp_intercept(self):
        with pytest.raises(ValueError, match="exp"):
            AccrualModel(intercept=0.0, intercept_se=0.1, dispersion=1.0,
                         psm=2.0, n_studies_fit=3)

    def test_valid(self):
        model = AccrualModel(intercept=1.0, intercept_se=0.1, dispersion=1.2,
                             psm=math.exp(1.0), n_studies_fit=3)
        assert model.psm == pytest.approx(math.e)


class TestScenario:
    def _base(self, **kw):
        args = dict(countries=(("US", 5),), target_enrollment=10, replicates=4,
                    mode="fixed", seed=1)
        args.update(kw)
        return Scenario(**args)

    def test_defaults(self):
        scenario = self._base()
        assert scenario.pi_level == 0.95
        assert scenario.horizon_months == 120.0
        assert scenario.total_sites == 5

    def test_rejects_duplicate_country(self):
        with pytest.raises(ValueError, match="duplicate"):
            self._base(countries=(("US", 5), ("US", 2)))

    def test_rejects_bad_mode(self):
        with pytest.raises(ValueError, match="mode"):
            self._base(mode="linear")

    def test_rejects_zero_replicates(self):
        with pytest.raises(ValueError, match="replicates"):
            self._base(replicates=0)

    def test_rejects_pi_level_bounds(self):
        with pytest.raises(ValueError, match="pi_level"):
            self._base(pi_level=1.0)

    def test_rejects_zero_sites(self):
        with pytest.raises(ValueError, match="site"):
            self._base(countries=(("US", 0),))

    def test_rejects_bad_seed(self):
        with pytest.raises(ValueError, match="seed"):
            self._base(seed=-3)


class TestSiteSchedule:
    def test_valid_grouping(self):
        schedule = SiteSchedule((("US", 1, 1.0), ("US", 2, 2.0), ("DE", 1, 0.5)))
        assert schedule.opens_by_country() == {"US": [1.0, 2.0], "DE": [0.5]}

    def test_rejects_decreasing_open(self):
        with pytest.raises(ValueError, match="decreases"):
            SiteSchedule((("US", 1, 2.0), ("US", 2, 1.0)))

    def test_rejects_duplicate_site(self):
        with pytest.raises(ValueError):
            SiteSchedule((("US", 1, 1.0), ("US", 1, 1.0)))

    def test_rejects_gapped_index(self):
        with pytest.raises(ValueError, match="site_index"):
            SiteSchedule((("US", 1, 1.0), ("US", 3, 2.0)))

    def test_rejects_negative_open(self):
        with pytest.raises(ValueError, match="open_month"):
            SiteSchedule((("US", 1, -0.1),))


class TestReplicateOutcome:
    def test_valid(self):
        outcome = ReplicateOutcome(1.0, 5.0, 10, (2, 6, 10))
        assert not outcome.censored

    def test_censored(self):
        outcome = ReplicateOutcome(1.0, None, 3, (1, 2, 3))
        assert outcome.censored

    def test_rejects_fsfd_after_lsfd(self):
        with pytest.raises(ValueError, match="fsfd"):
            ReplicateOutcome(6.0, 5.0, 10, (2, 6, 10))

    def test_rejects_decreasing_monthly(self):
        with pytest.raises(ValueError, match="non-decreasing"):
            ReplicateOutcome(1.0, 5.0, 10, (6, 2, 10))

    def test_rejects_total_mismatch(self):
        with pytest.raises(ValueError, match="total_enrolled"):
            ReplicateOutcome(1.0, 5.0, 9, (2, 6, 10))


class TestForecastSummary:
    def test_orders_pi_and_point(self):
        with pytest.raises(ValueError, match="pi_low"):
            ForecastSummary(10.0, 12.0, 14.0, None, None, None, 0.0, ())

    def test_censored_bounds_allowed(self):
        summary = ForecastSummary(10.0, 8.0, None, 2.0, 1.0, 3.0, 0.3, ())
        assert summary.pi_high_months is None

    def test_rejects_bad_fraction(self):
        with pytest.raises(ValueError, match="censored_fraction"):
            ForecastSummary(10.0, 8.0, 12.0, None, None, None, 1.5, ())


class TestEvaluationRow:
    def test_consistent_row(self):
        row = EvaluationRow("S", 10.0, 11.0, 1.0, 9.0, 12.0,
                            within_pi=True, within_1mo=False,
                            within_2mo=True, within_3mo=True)
        assert row.prediction_error == 1.0

    def test_window_membership_is_strict(self):
        # |error| exactly 1.0 is outside the 1-month window
        with pytest.raises(ValueError, match="within"):
            EvaluationRow("S", 10.0, 11.0, 1.0, 9.0, 12.0,
                          within_pi=True, within_1mo=True,
                          within_2mo=True, within_3mo=True)

    def test_rejects_error_mismatch(self):
        with pytest.raises(ValueError, match="prediction_error"):
            EvaluationRow("S", 10.0, 11.0, 2.0, 9.0, 12.0,
                          within_pi=True, within_1mo=False,
                          within_2mo=True, within_3mo=True)

    def test_rejects_pi_flag_mismatch(self):
        with pytest.raises(ValueError, match="within_pi"):
            EvaluationRow("S", 10.0, 11.0, 1.0, 9.0, 12.0,
                          within_pi=False, within_1mo=False,
                          within_2mo=True, within_3mo=True)


class TestSummaryMetrics:
    def test_rejects_coverage_out_of_range(self):
        with pytest.raises(ValueError, match="coverage"):
            SummaryMetrics(1.0, 1.0, 0.0, 0.0, 0.0, 1.2, 0.5, 0.5, 0.5)

    def test_inf_mean_allowed(self):
        metrics = SummaryMetrics(1.0, math.inf, 0.0, 0.0, math.inf, 1.0, 0.5, 0.5, 0.5)
        assert math.isinf(metrics.pi_length_mean)
