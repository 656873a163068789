"""
Tests for maximum term, central index, the Monte-Carlo Nevanlinna
functionals and the order / hyper-order estimators.
"""

import math

import pytest

from growthlab.entities.growth import RadiusGrid, TrustPolicy
from growthlab.entities.power_series import PowerSeries
from growthlab.entities.quotient import Quotient
from growthlab.services.errors import (
    DegenerateSeriesError,
    InsufficientDataError,
    PreconditionError,
    UnresolvedRadiusError,
)
from growthlab.services.growth_functionals import (
    ProfileOptions,
    build_profile,
    build_profiles,
    central_index,
    characteristic,
    counting_from_valence,
    hyper_order_estimate,
    infinite_order_signature,
    max_term,
    order_estimate,
    proximity,
    sphere_log_integral,
    valence_jensen,
)
from growthlab.services.series_core import (
    exp_series,
    homogeneous_l1_norms,
    make_exp_of_linear,
    make_polynomial,
    truncate,
)
from growthlab.workers.pool import WorkerPool

SAMPLES = 100_000


def z1_series() -> PowerSeries:
    return make_polynomial(2, [((1, 0), 1)])


def within(estimate, expected, sigmas=3.0, floor=1e-9) -> bool:
    return abs(estimate.value - expected) <= sigmas * estimate.std_error + floor


class TestMaxTermAndCentralIndex:
    """μ̃ and ν̃ from homogeneous norms."""

    def test_polynomial(self):
        p = make_polynomial(2, [((3, 0), 1), ((1, 2), 2), ((0, 1), 0.5)])
        norms = homogeneous_l1_norms(p)
        assert max_term(norms, 2.0) == pytest.approx(math.log(3) + 3 * math.log(2))
        assert central_index(norms, 2.0) == 3

    def test_tie_resolves_to_larger_degree(self):
        norms = homogeneous_l1_norms(make_exp_of_linear((1, 1), 30))
        assert max_term(norms, 1.0) == pytest.approx(math.log(2))
        assert central_index(norms, 1.0) == 2

    @pytest.mark.parametrize("r", [1.3, 2.7, 4.1, 7.9, 12.2])
    def test_exponential_central_index(self, r):
        norms = homogeneous_l1_norms(make_exp_of_linear((1, 1), 80))
        assert abs(central_index(norms, r) - math.floor(2 * r)) <= 1

    def test_constant(self):
        norms = homogeneous_l1_norms(PowerSeries.constant(3, -2.5))
        assert max_term(norms, 10.0) == pytest.approx(math.log(2.5))
        assert central_index(norms, 10.0) == 0

    def test_zero_series(self):
        norms = homogeneous_l1_norms(PowerSeries.zero(2, 3))
        assert max_term(norms, 2.0) == -math.inf
        with pytest.raises(DegenerateSeriesError):
            central_index(norms, 2.0)

    def test_central_index_non_decreasing(self):
        norms = homogeneous_l1_norms(make_exp_of_linear((1, 2j), 90))
        indices = [central_index(norms, r) for r in RadiusGrid.spanning(1.1, 15, 40).radii]
        assert indices == sorted(indices)

    @pytest.mark.parametrize("series", [
        make_exp_of_linear((1, 2j), 90),
        make_polynomial(2, [((3, 0), 1), ((1, 2), 2), ((0, 1), 0.5), ((0, 0), -4)]),
        exp_series(truncate(make_polynomial(2, [((2, 0), 1), ((0, 2), 1)]), 200)),
    ])
    def test_central_index_brackets_max_term_growth(self, series):
        """
        ν̃(r)·log(R/r) ≤ log μ̃(R) − log μ̃(r) ≤ ν̃(R)·log(R/r) for r < R.
        """
        norms = homogeneous_l1_norms(series)
        radii = RadiusGrid.spanning(1.1, 5.0, 25).radii
        for r, R in zip(radii, radii[1:]):
            growth = max_term(norms, R) - max_term(norms, r)
            step = math.log(R / r)
            assert central_index(norms, r) * step <= growth + 1e-9
            assert growth <= central_index(norms, R) * step + 1e-9

    @pytest.mark.parametrize("series", [
        make_exp_of_linear((1, 1), 80),
        make_polynomial(2, [((4, 1), 1), ((0, 0), 3)]),
        exp_series(make_exp_of_linear((1, 0), 120)),
    ])
    def test_max_term_non_decreasing(self, series):
        norms = homogeneous_l1_norms(series)
        values = [max_term(norms, r) for r in RadiusGrid.spanning(1.05, 12, 40).radii]
        assert all(b >= a for a, b in zip(values, values[1:]))


@pytest.mark.numerics
class TestProximityAndIntegrals:
    """Monte-Carlo proximity, sphere log-integrals and valences."""

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_constant_proximity(self, m):
        estimate = proximity(PowerSeries.constant(m, math.e), 3.0, count=512)
        assert estimate.value == pytest.approx(1.0, abs=1e-15)
        assert estimate.std_error == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("r", [2.0, 4.0, 8.0])
    def test_coordinate_proximity(self, r):
        """
        Expected: m(r, z1) = log r − 1/2 + 1/(2r²) in C².
        """
        estimate = proximity(z1_series(), r, count=SAMPLES, seed=1)
        assert within(estimate, math.log(r) - 0.5 + 1 / (2 * r * r))

    @pytest.mark.parametrize("r", [2.0, 4.0])
    def test_reciprocal_proximity(self, r):
        reciprocal = Quotient(PowerSeries.constant(2, 1.0), z1_series())
        estimate = proximity(reciprocal, r, count=SAMPLES, seed=2)
        assert within(estimate, 1 / (2 * r * r))

    def test_coordinate_log_integral(self):
        estimate = sphere_log_integral(z1_series(), 3.0, count=SAMPLES, seed=3)
        assert within(estimate, math.log(3.0) - 0.5)
        assert estimate.rejected == 0

    def test_product_log_integral(self):
        f = make_polynomial(2, [((1, 1), 1)])
        estimate = sphere_log_integral(f, 5.0, count=SAMPLES, seed=4)
        assert within(estimate, 2 * (math.log(5.0) - 0.5))

    def test_constant_log_integral(self):
        estimate = sphere_log_integral(PowerSeries.constant(2, 4.0), 2.0, count=64)
        assert estimate.value == pytest.approx(math.log(4.0))

    def test_coordinate_valence_is_exact(self):
        estimate = valence_jensen(z1_series(), 4.0, r0=1.25, count=2000, seed=5)
        assert estimate.value == pytest.approx(math.log(4.0 / 1.25), abs=1e-12)
        assert estimate.std_error < 1e-12

    def test_zero_free_valence(self):
        estimate = valence_jensen(make_exp_of_linear((1, 1), 60), 4.0, count=4000, seed=6)
        assert within(estimate, 0.0)

    def test_constant_valence(self):
        assert valence_jensen(PowerSeries.constant(2, 3.0), 4.0).value == 0.0

    def test_valence_needs_ordered_radii(self):
        with pytest.raises(PreconditionError):
            valence_jensen(z1_series(), 1.2, r0=1.25)
        with pytest.raises(PreconditionError):
            valence_jensen(z1_series(), 3.0, r0=0.9)

    @pytest.mark.parametrize("power", [1, 2, 3])
    def test_counting_of_coordinate_power(self, power):
        f = make_polynomial(2, [((power, 0), 1)])
        estimate = counting_from_valence(f, 2.0, 2.5, count=1000, seed=7)
        assert estimate.value == pytest.approx(power, abs=1e-9)

    def test_counting_of_zero_free_function(self):
        estimate = counting_from_valence(make_exp_of_linear((1, 1), 60), 3.0, 4.0, count=4000, seed=8)
        assert within(estimate, 0.0)

    @pytest.mark.parametrize("r", [20.0, 26.0, 30.0])
    def test_exponential_proximity_at_large_radii(self, r):
        """
        Expected: m(r, exp(z1+z2)) = 2√2·r / (3π) in C².
        """
        f = make_exp_of_linear((1, 1), 150)
        estimate = proximity(f, r, count=20_000, seed=11)
        assert estimate.rejected == 0
        assert estimate.count == 20_000
        assert within(estimate, 2 * math.sqrt(2) * r / (3 * math.pi),
                      floor=estimate.bias_bound + 1e-9)

    def test_proximity_keeps_the_sigma_sample(self):
        f = make_exp_of_linear((1, 1), 150)
        first = proximity(f, 26.0, count=500, seed=12)
        second = proximity(f, 26.0, count=1000, seed=12)
        assert first.count == 500 and second.count == 1000
        assert first.rejected == 0 and second.rejected == 0

    def test_rounding_swamped_radius_is_unresolved(self):
        exp_sum = make_exp_of_linear((1, 1), 150)
        without_closed_form = PowerSeries(2, exp_sum.coefficients, exp_sum.truncation_degree)
        with pytest.raises(UnresolvedRadiusError) as excinfo:
            proximity(without_closed_form, 30.0, count=200, seed=13)
        assert excinfo.value.radii == (30.0,)

    @pytest.mark.parametrize("r", [20.0, 24.0])
    def test_zero_free_valence_at_large_radii(self, r):
        estimate = valence_jensen(make_exp_of_linear((1, 1), 130), r, count=4000, seed=14)
        assert estimate.rejected == 0
        assert within(estimate, 0.0, floor=estimate.bias_bound + 1e-9)

    def test_zero_free_counting_at_large_radii(self):
        f = make_exp_of_linear((1, 1), 130)
        estimate = counting_from_valence(f, 10.0, 12.5, count=4000, seed=15)
        assert within(estimate, 0.0, floor=estimate.bias_bound + 1e-9)

    @pytest.mark.parametrize("r", [2.0, 4.0, 8.0])
    def test_first_main_theorem_balance(self, r):
        """
        m(r,1/z1) + N(r,0;z1) − m(r,z1) does not depend on r.

        Expected: 1/2 − log r0.
        """
        r0 = 1.25
        reciprocal = Quotient(PowerSeries.constant(2, 1.0), z1_series())
        near_poles = proximity(reciprocal, r, count=SAMPLES, seed=9)
        near_zero = proximity(z1_series(), r, count=SAMPLES, seed=9)
        zeros = valence_jensen(z1_series(), r, r0=r0, count=1000, seed=9)
        balance = near_poles.value + zeros.value - near_zero.value
        spread = math.hypot(near_poles.std_error, near_zero.std_error)
        assert abs(balance - (0.5 - math.log(r0))) <= 4 * spread

    def test_characteristic_of_quotient_counts_poles(self):
        r, r0 = 4.0, 1.25
        reciprocal = Quotient(PowerSeries.constant(2, 1.0), z1_series())
        estimate = characteristic(reciprocal, r, count=SAMPLES, seed=10, r0=r0)
        assert within(estimate, 1 / (2 * r * r) + math.log(r / r0))


class TestProfiles:
    """build_profile / build_profiles."""

    def test_trusted_profile_has_every_quantity(self):
        f = make_exp_of_linear((1, 1), 60)
        profile = build_profile(f, 3.0, ProfileOptions(seed=1, count=256, restarts=2, with_torus=True))
        assert profile.trusted
        assert profile.central_index == 6
        assert profile.log_M_sphere == pytest.approx(3 * math.sqrt(2), rel=1e-3)
        assert profile.log_M_torus == pytest.approx(6.0, rel=1e-6)
        assert math.isfinite(profile.proximity)
        assert math.isfinite(profile.valence)

    def test_untrusted_profile_keeps_norm_quantities_only(self):
        f = make_exp_of_linear((1, 1), 20)
        profile = build_profile(f, 30.0, ProfileOptions(count=64, restarts=2))
        assert not profile.trusted
        assert math.isfinite(profile.log_max_term)
        assert math.isnan(profile.log_M_sphere)
        assert math.isnan(profile.proximity)

    def test_profiles_follow_radius_order(self):
        f = make_exp_of_linear((1, 1), 60)
        radii = RadiusGrid(1.5, 1.5, 4).radii
        profiles = build_profiles(f, radii, ProfileOptions.norms_only())
        assert [p.radius for p in profiles] == list(radii)
        assert len(profiles[0].to_row()) == 10

    def test_each_radius_draws_its_own_seed(self):
        f = make_exp_of_linear((1, 1), 60)
        radii = RadiusGrid(1.5, 1.5, 4).radii
        profiles = build_profiles(f, radii, ProfileOptions(seed=3, count=64, restarts=1))
        seeds = [p.seed for p in profiles]
        assert len(set(seeds)) == len(radii)
        assert 3 not in seeds

    def test_profiles_do_not_depend_on_job_count(self):
        f = make_exp_of_linear((1, 1), 60)
        radii = RadiusGrid(1.5, 1.5, 4).radii
        options = ProfileOptions(seed=3, count=256, restarts=2)
        with WorkerPool.session(1):
            serial = build_profiles(f, radii, options)
        with WorkerPool.session(3):
            parallel = build_profiles(f, radii, options)
        def summary(profiles):
            return [(p.seed, p.log_M_sphere, p.proximity, p.valence) for p in profiles]

        assert summary(serial) == summary(parallel)

    def test_zero_series_cannot_be_profiled(self):
        with pytest.raises(DegenerateSeriesError):
            build_profiles(PowerSeries.zero(2), [2.0])


class TestOrderEstimates:
    """Windowed log-log slopes."""

    @pytest.fixture
    def exp_sum_profiles(self):
        f = make_exp_of_linear((1, 1), 160)
        return build_profiles(f, RadiusGrid.spanning(10, 36, 12).radii, ProfileOptions.norms_only())

    @pytest.fixture
    def polynomial_profiles(self):
        p = make_polynomial(2, [((3, 0), 1), ((0, 2), 2), ((0, 0), 1)])
        return build_profiles(p, RadiusGrid.spanning(1e4, 1e8, 12).radii, ProfileOptions.norms_only())

    def test_exponential_has_order_one(self, exp_sum_profiles):
        assert order_estimate(exp_sum_profiles, "max_term") == pytest.approx(1.0, abs=0.1)
        assert order_estimate(exp_sum_profiles, "central_index") == pytest.approx(1.0, abs=0.1)

    def test_polynomial_has_order_zero(self, polynomial_profiles):
        assert order_estimate(polynomial_profiles, "max_term") <= 0.1
        assert order_estimate(polynomial_profiles, "central_index") == pytest.approx(0.0, abs=1e-12)

    def test_polynomial_hyper_order(self, polynomial_profiles):
        assert hyper_order_estimate(polynomial_profiles) <= 0.1
        assert not infinite_order_signature(polynomial_profiles)

    def test_exponential_hyper_order_small(self, exp_sum_profiles):
        """
        Finite order shows up as a hyper-order slope decaying like 1/log r.
        """
        hyper = hyper_order_estimate(exp_sum_profiles)
        assert hyper <= 0.4
        assert hyper < order_estimate(exp_sum_profiles, "central_index") / 2

    def test_gaussian_type_order_two(self):
        g = truncate(make_polynomial(2, [((2, 0), 1), ((0, 2), 1)]), 320)
        f = exp_series(g)
        profiles = build_profiles(f, RadiusGrid.spanning(3, 6, 12).radii, ProfileOptions.norms_only())
        assert all(p.trusted for p in profiles)
        assert order_estimate(profiles, "max_term") == pytest.approx(2.0, abs=0.2)

    @pytest.mark.slow
    def test_double_exponential_hyper_order_one(self):
        f = exp_series(make_exp_of_linear((1, 0), 300))
        profiles = build_profiles(f, RadiusGrid.spanning(1.5, 3.5, 12).radii,
                                  ProfileOptions.norms_only(TrustPolicy(decay_ratio=0.9)))
        assert all(p.trusted for p in profiles)
        assert hyper_order_estimate(profiles) == pytest.approx(1.0, abs=0.3)
        assert infinite_order_signature(profiles)

    def test_too_few_trusted_radii(self):
        f = make_exp_of_linear((1, 1), 30)
        profiles = build_profiles(f, RadiusGrid.spanning(2, 40, 10).radii, ProfileOptions.norms_only())
        with pytest.raises(InsufficientDataError):
            order_estimate(profiles)

    def test_unknown_source(self, polynomial_profiles):
        with pytest.raises(ValueError):
            order_estimate(polynomial_profiles, "nonsense")
