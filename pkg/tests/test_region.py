"""Rejection-region extraction and exact region probabilities."""

import math

import pytest

from borrowoc import (
    BorrowingMethod,
    Interval,
    ScenarioOneArm,
    interval_count,
    norm_cdf,
    norm_quantile,
    rejection_prob,
    rejection_region,
)

SCEN = ScenarioOneArm(n=25, sigma=1.0, theta0=0.0, alpha=0.025,
                      nE=20, theta1=0.5)
SCEN_BIG_EXT = ScenarioOneArm(n=25, sigma=1.0, theta0=0.0, alpha=0.025,
                              nE=1000, theta1=0.5)


class TestNoBorrowRegion:
    def test_single_upper_interval_at_z_threshold(self):
        region = rejection_region(SCEN, 0.0, BorrowingMethod.none())
        assert interval_count(region) == 1
        (iv,) = region.intervals
        # classical one-sided z-test cutoff theta0 + q(1 - alpha) * se
        assert iv.lo == pytest.approx(norm_quantile(0.975) / 5.0, abs=1e-9)
        assert iv.hi == math.inf

    def test_region_ignores_external_mean(self):
        a = rejection_region(SCEN, -3.0, BorrowingMethod.none())
        b = rejection_region(SCEN, 3.0, BorrowingMethod.none())
        assert a.intervals[0].lo == pytest.approx(b.intervals[0].lo, abs=1e-9)


class TestFixedPpRegion:
    def test_boundary_golden_at_null_external(self):
        region = rejection_region(SCEN, 0.0, BorrowingMethod.fixed_power_prior(0.5))
        assert interval_count(region) == 1
        # root of the posterior-tail threshold equation, frozen from an
        # independent 50-digit bisection of the closed-form boundary
        assert region.intervals[0].lo == pytest.approx(
            0.46381213218163133, abs=1e-9)
        assert region.intervals[0].hi == math.inf

    def test_boundary_shifts_down_with_favorable_external(self):
        lo_at = {}
        for de in (-0.5, 0.0, 0.5):
            region = rejection_region(SCEN, de, BorrowingMethod.fixed_power_prior(0.5))
            assert interval_count(region) == 1
            lo_at[de] = region.intervals[0].lo
        assert lo_at[-0.5] > lo_at[0.0] > lo_at[0.5]

    def test_full_weight_matches_pooled_algebra(self):
        # delta = 1 pools both samples: threshold solves
        # (n dbar + nE dE) / (n + nE) = q(c) / sqrt(n + nE)
        region = rejection_region(SCEN, 0.2, BorrowingMethod.fixed_power_prior(1.0))
        expected = (norm_quantile(0.975) * math.sqrt(45.0) - 20.0 * 0.2) / 25.0
        assert region.intervals[0].lo == pytest.approx(expected, abs=1e-9)


class TestEmpiricalBayesRegion:
    def test_mild_conflict_splits_into_two_intervals(self):
        region = rejection_region(SCEN_BIG_EXT, 0.10, BorrowingMethod.empirical_bayes())
        assert interval_count(region) == 2
        first, second = region.intervals
        assert first.hi < second.lo
        assert second.hi == math.inf
        # the detached piece sits around the external mean, where the
        # re-estimated weight snaps to full borrowing
        assert first.lo < 0.10 < first.hi

    def test_agreement_and_strong_conflict_stay_single(self):
        for de in (0.0, 0.20):
            region = rejection_region(SCEN_BIG_EXT, de, BorrowingMethod.empirical_bayes())
            assert interval_count(region) == 1

    def test_moderate_external_sample_single_interval(self):
        for de in (-0.5, 0.0, 0.56, 1.5):
            region = rejection_region(SCEN, de, BorrowingMethod.empirical_bayes())
            assert interval_count(region) == 1


class TestFlaggedDegenerateScan:
    def test_always_reject_threshold(self):
        # c = 0 rejects on any positive tail mass: no crossing anywhere
        region = rejection_region(SCEN, 0.0, BorrowingMethod.none(), c=0.0)
        assert region.flagged
        assert region.intervals == (Interval(-math.inf, math.inf),)
        assert rejection_prob(region, 0.0, SCEN.n, SCEN.sigma) == 1.0

    def test_empty_region_has_zero_mass(self):
        from borrowoc import RejectionRegion
        region = RejectionRegion((), Interval(-5.0, 5.0), 1e-10, flagged=True)
        assert rejection_prob(region, 0.0, SCEN.n, SCEN.sigma) == 0.0

    def test_rejects_non_finite_external_mean(self):
        with pytest.raises(ValueError):
            rejection_region(SCEN, math.inf, BorrowingMethod.none())


class TestRejectionRegionValidation:
    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            RejectionRegionFactory()

    def test_touching_endpoints_allowed(self):
        from borrowoc import RejectionRegion
        RejectionRegion((Interval(0.0, 1.0), Interval(1.0, 2.0)),
                        Interval(-5.0, 5.0), 1e-10)


def RejectionRegionFactory():
    from borrowoc import RejectionRegion
    return RejectionRegion((Interval(0.0, 2.0), Interval(1.0, 3.0)),
                           Interval(-5.0, 5.0), 1e-10)


class TestRejectionProb:
    def test_single_interval_golden(self):
        region = rejection_region(SCEN, 0.0, BorrowingMethod.fixed_power_prior(0.5))
        # null rejection rate and power frozen from the closed form
        assert rejection_prob(region, 0.0, 25, 1.0) == pytest.approx(
            0.010195873707045288, abs=1e-9)
        assert rejection_prob(region, 0.5, 25, 1.0) == pytest.approx(
            0.5717924048435208, abs=1e-9)

    def test_half_line_region(self):
        region = rejection_region(SCEN, 0.0, BorrowingMethod.none())
        assert rejection_prob(region, 0.0, 25, 1.0) == pytest.approx(0.025, abs=1e-9)

    def test_two_piece_mass_adds_up(self):
        region = rejection_region(SCEN_BIG_EXT, 0.10, BorrowingMethod.empirical_bayes())
        total = rejection_prob(region, 0.0, 25, 1.0)
        parts = [
            rejection_prob(
                type(region)((iv,), region.scan_bounds, region.refinement_tol),
                0.0, 25, 1.0)
            for iv in region.intervals
        ]
        assert total == pytest.approx(math.fsum(parts), abs=1e-12)
        assert all(p > 0.0 for p in parts)

    def test_clipped_to_unit_interval(self):
        region = rejection_region(SCEN, 0.0, BorrowingMethod.none(), c=0.0)
        assert rejection_prob(region, 100.0, 25, 1.0) == 1.0
