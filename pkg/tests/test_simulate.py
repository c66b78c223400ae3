import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enrollcast import (
    CountryActivationProfile,
    RandomStream,
    ReplicateOutcome,
    Scenario,
    SiteSchedule,
    exposure,
    forecast,
    simulate_replicate,
    summarize_forecast,
)
from enrollcast.simulate import _interp_quantile


def _flat_schedule(n_sites, open_month=0.0, country="US"):
    return SiteSchedule(tuple((country, j + 1, open_month) for j in range(n_sites)))


class TestExposure:
    def test_site_open_from_start(self):
        assert exposure(0.0, 10.0, 0.0) == 10.0

    def test_partial_overlap(self):
        assert exposure(0.0, 10.0, 6.0) == 4.0

    def test_site_opens_after_window(self):
        assert exposure(0.0, 10.0, 12.0) == 0.0

    def test_rejects_reversed_window(self):
        with pytest.raises(ValueError, match="reversed"):
            exposure(5.0, 4.0, 0.0)

    @settings(max_examples=100, deadline=None)
    @given(
        u1=st.floats(0, 100, allow_nan=False),
        width=st.floats(0, 100, allow_nan=False),
        u_open=st.floats(0, 200, allow_nan=False),
    )
    def test_equals_intersection_length(self, u1, width, u_open):
        u2 = u1 + width
        expected = max(0.0, u2 - max(u1, u_open))
        assert exposure(u1, u2, u_open) == pytest.approx(expected, abs=1e-12)


class TestSimulateReplicate:
    def test_zero_rate_means_no_arrivals(self):
        outcome = simulate_replicate(_flat_schedule(3), 0.0, 5, 12.0, RandomStream(1))
        assert outcome.fsfd_month is None
        assert outcome.lsfd_month is None
        assert outcome.total_enrolled == 0
        assert outcome.monthly_cumulative == (0,) * 12

    def test_tiny_horizon_censors(self):
        outcome = simulate_replicate(_flat_schedule(2), 1.0, 50, 1e-6, RandomStream(1))
        assert outcome.censored
        assert len(outcome.monthly_cumulative) == 1
        assert outcome.monthly_cumulative[0] == outcome.total_enrolled

    def test_single_site_mean_total(self):
        root = RandomStream(17)
        schedule = _flat_schedule(1)
        totals = np.array([
            simulate_replicate(schedule, 1.0, 10_000, 10.0, root.child(b)).total_enrolled
            for b in range(10_000)
        ])
        # Poisson(10): mean within ~3 sigma of a 1e4-replicate average
        assert abs(totals.mean() - 10.0) < 0.1

    def test_superposition_matches_pooled_poisson(self):
        root = RandomStream(23)
        schedule = _flat_schedule(4)
        totals = np.array([
            simulate_replicate(schedule, 0.8, 10_000, 5.0, root.child(b)).total_enrolled
            for b in range(10_000)
        ])
        mean = totals.mean()
        assert abs(mean - 16.0) < 3 * np.sqrt(16.0 / totals.size) * 1.5
        assert 0.9 < totals.var() / mean < 1.1

    def test_arrivals_respect_site_openings(self):
        schedule = SiteSchedule((("US", 1, 2.5), ("US", 2, 4.0), ("DE", 1, 3.0)))
        root = RandomStream(5)
        for b in range(300):
            outcome = simulate_replicate(schedule, 2.0, 3, 24.0, root.child(b))
            if outcome.fsfd_month is not None:
                assert outcome.fsfd_month >= 2.5
            if outcome.lsfd_month is not None:
                assert outcome.lsfd_month >= outcome.fsfd_month

    def test_monthly_curve_consistent_with_milestones(self):
        schedule = _flat_schedule(2)
        outcome = simulate_replicate(schedule, 1.5, 4, 6.0, RandomStream(77))
        monthly = outcome.monthly_cumulative
        assert len(monthly) == 6
        assert monthly[-1] == outcome.total_enrolled
        if outcome.lsfd_month is not None:
            # by the end of the month containing lsfd, at least target arrivals
            month_idx = int(np.ceil(outcome.lsfd_month)) - 1
            assert monthly[min(month_idx, 5)] >= 4

    def test_deterministic_given_stream(self):
        schedule = _flat_schedule(3, open_month=1.0)
        a = simulate_replicate(schedule, 0.7, 10, 18.0, RandomStream(9).child(4))
        b = simulate_replicate(schedule, 0.7, 10, 18.0, RandomStream(9).child(4))
        assert a == b

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError, match="horizon"):
            simulate_replicate(_flat_schedule(1), 1.0, 5, 0.0, RandomStream(1))
        with pytest.raises(ValueError, match="target"):
            simulate_replicate(_flat_schedule(1), 1.0, 0, 5.0, RandomStream(1))
        with pytest.raises(ValueError, match="psm"):
            simulate_replicate(_flat_schedule(1), -1.0, 5, 5.0, RandomStream(1))


class TestForecast:
    def test_missing_country_error_names_it(self, fitted):
        model, profiles = fitted
        scenario = Scenario(countries=(("US", 2), ("XX", 1)), target_enrollment=5,
                            replicates=2, mode="fixed", seed=1)
        with pytest.raises(ValueError, match="XX"):
            forecast(scenario, profiles, model)

    def test_requires_model_or_override(self, fitted):
        _, profiles = fitted
        scenario = Scenario(countries=(("US", 2),), target_enrollment=5,
                            replicates=2, mode="fixed", seed=1)
        with pytest.raises(ValueError, match="psm_override"):
            forecast(scenario, profiles, None)

    def test_fixed_mode_with_override_is_reproducible(self, fitted):
        _, profiles = fitted
        scenario = Scenario(countries=(("US", 3), ("DE", 2)), target_enrollment=20,
                            replicates=1, mode="fixed", seed=123, psm_override=0.9)
        a, scheds_a = forecast(scenario, profiles, None, keep_schedules=True)
        b, scheds_b = forecast(scenario, profiles, None, keep_schedules=True)
        assert a == b
        assert scheds_a == scheds_b
        # fixed mode: schedule is the deterministic linear projection
        opens = scheds_a[0].opens_by_country()
        profile = {p.country: p for p in profiles}["US"]
        assert opens["US"][0] == pytest.approx(profile.t_hat)

    def test_thread_count_does_not_change_results(self, fitted):
        model, profiles = fitted
        scenario = Scenario(countries=(("US", 4), ("DE", 3)), target_enrollment=40,
                            replicates=64, mode="perturbed", seed=99)
        serial, _ = forecast(scenario, profiles, model)
        threaded, _ = forecast(scenario, profiles, model, n_threads=4)
        assert serial == threaded

    def test_replicates_seeded_by_index_not_sequence(self, fitted):
        model, profiles = fitted
        kw = dict(countries=(("US", 4),), target_enrollment=30, mode="poisson", seed=5)
        small, _ = forecast(Scenario(replicates=3, **kw), profiles, model)
        large, _ = forecast(Scenario(replicates=10, **kw), profiles, model)
        assert large[:3] == small

    @pytest.mark.parametrize("mode", ["fixed", "perturbed", "poisson"])
    def test_adding_a_site_never_lengthens_a_replicate(self, fitted, mode):
        model, profiles = fitted
        base = Scenario(countries=(("US", 4), ("DE", 3)), target_enrollment=45,
                        replicates=400, mode=mode, seed=31, horizon_months=240.0)
        more = Scenario(countries=(("US", 5), ("DE", 3)), target_enrollment=45,
                        replicates=400, mode=mode, seed=31, horizon_months=240.0)
        base_reps, _ = forecast(base, profiles, model)
        more_reps, _ = forecast(more, profiles, model)
        for a, b in zip(base_reps, more_reps):
            la = a.lsfd_month if a.lsfd_month is not None else np.inf
            lb = b.lsfd_month if b.lsfd_month is not None else np.inf
            assert lb <= la + 1e-12

    def test_pi_bands_cover_same_process_truth(self, fitted):
        # forecasts drawn from the same law as the truth: 95% band should
        # cover the realized duration about 95% of the time
        _, profiles = fitted
        covered = 0
        n_trials = 200
        for k in range(n_trials):
            scenario = Scenario(countries=(("US", 5), ("DE", 4)), target_enrollment=60,
                                replicates=400, mode="fixed", seed=1000 + k,
                                psm_override=0.5, horizon_months=120.0)
            reps, _ = forecast(scenario, profiles, None)
            summary = summarize_forecast(reps, 0.95)
            truth_scenario = Scenario(countries=(("US", 5), ("DE", 4)),
                                      target_enrollment=60, replicates=1,
                                      mode="fixed", seed=777_000 + k,
                                      psm_override=0.5, horizon_months=120.0)
            (truth_rep,), _ = forecast(truth_scenario, profiles, None)
            truth = truth_rep.lsfd_month
            assert truth is not None
            low = summary.pi_low_months if summary.pi_low_months is not None else 0.0
            high = summary.pi_high_months if summary.pi_high_months is not None else np.inf
            if low <= truth <= high:
                covered += 1
        assert 0.90 * n_trials <= covered <= 0.98 * n_trials


class TestSummarizeForecast:
    def _outcome(self, lsfd, fsfd=None, monthly=(1,)):
        if fsfd is None:
            fsfd = lsfd
        total = monthly[-1] if monthly else 0
        return ReplicateOutcome(fsfd, lsfd, total, monthly)

    def test_odd_count_median(self):
        reps = [self._outcome(v) for v in (10.0, 12.0, 14.0)]
        summary = summarize_forecast(reps, 1 / 3)
        assert summary.point_months == 12.0

    def test_total_censoring(self):
        reps = [ReplicateOutcome(None, None, 0, (0,)) for _ in range(5)]
        summary = summarize_forecast(reps, 0.95)
        assert summary.point_months is None
        assert summary.censored_fraction == 1.0
        assert summary.pi_low_months is None
        assert summary.pi_high_months is None

    def test_uniform_durations_give_expected_pi(self):
        rng = np.random.default_rng(4)
        values = rng.random(1000)
        reps = [self._outcome(float(v)) for v in values]
        summary = summarize_forecast(reps, 0.95)
        assert summary.pi_low_months == pytest.approx(0.025, abs=0.01)
        assert summary.pi_high_months == pytest.approx(0.975, abs=0.01)
        assert summary.point_months == pytest.approx(0.5, abs=0.05)

    def test_censored_upper_bound_becomes_absent(self):
        reps = [self._outcome(float(v)) for v in range(8)]
        reps += [ReplicateOutcome(1.0, None, 1, (1,)) for _ in range(2)]
        summary = summarize_forecast(reps, 0.95)
        assert summary.censored_fraction == pytest.approx(0.2)
        assert summary.pi_high_months is None       # censored quantile: the Inf case
        assert summary.point_months == pytest.approx(3.5)  # median of uncensored

    def test_curve_quantiles_per_month(self):
        reps = [
            self._outcome(2.0, monthly=(1, 3)),
            self._outcome(2.0, monthly=(2, 4)),
            self._outcome(2.0, monthly=(3, 5)),
        ]
        summary = summarize_forecast(reps, 0.5)
        months = [row[0] for row in summary.curve]
        medians = [row[2] for row in summary.curve]
        assert months == [1.0, 2.0]
        assert medians == [2.0, 4.0]

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="at least one"):
            summarize_forecast([], 0.95)

    def test_rejects_mixed_grids(self):
        reps = [self._outcome(1.0, monthly=(1,)), self._outcome(1.0, monthly=(1, 1))]
        with pytest.raises(ValueError, match="grid"):
            summarize_forecast(reps, 0.95)


class TestInterpQuantile:
    def test_linear_interpolation_rule(self):
        vals = np.array([0.0, 1.0, 2.0, 3.0])
        assert _interp_quantile(vals, 0.25) == pytest.approx(0.75)
        assert _interp_quantile(vals, 0.5) == pytest.approx(1.5)
        assert _interp_quantile(vals, 0.0) == 0.0
        assert _interp_quantile(vals, 1.0) == 3.0

    def test_matches_numpy_on_finite_data(self):
        rng = np.random.default_rng(0)
        vals = np.sort(rng.random(37))
        for q in (0.025, 0.31, 0.5, 0.77, 0.975):
            assert _interp_quantile(vals, q) == pytest.approx(
                float(np.quantile(vals, q)), abs=1e-12
            )

    def test_exact_order_statistic_next_to_inf(self):
        # q landing exactly on a finite order statistic stays finite even
        # when its successor is +inf
        vals = np.array([1.0, 2.0, 3.0, np.inf, np.inf])
        assert _interp_quantile(vals, 0.5) == 3.0
        assert np.isinf(_interp_quantile(vals, 0.8))
