"""
Tests for σ sampling on spheres, guarded log-modulus evaluation and the
maximum-modulus searches over spheres and determining tori.
"""

import math

import numpy as np
import pytest
from scipy import stats

from growthlab.entities.power_series import PowerSeries
from growthlab.entities.quotient import Quotient
from growthlab.services.errors import UntrustedRadiusError
from growthlab.services.geometry_sampling import (
    log_modulus,
    max_modulus_sphere,
    max_modulus_torus,
    sample_sigma,
    sample_until_usable,
    seeded_radii,
)
from growthlab.services.series_core import make_exp_of_linear, make_polynomial, scale


def phase_distance(a: float, b: float) -> float:
    return abs(np.exp(1j * a) - np.exp(1j * b))


class TestSphereSampling:
    """sample_sigma."""

    @pytest.mark.parametrize("m", [1, 2, 3, 5])
    def test_points_lie_on_sphere(self, m):
        sample = sample_sigma(m, 2.5, 1000, seed=1)
        norms = np.linalg.norm(sample.points, axis=1)
        assert np.allclose(norms, 2.5, rtol=1e-12, atol=0)
        assert sample.dimension == m
        assert len(sample) == 1000

    def test_same_seed_same_points(self):
        first = sample_sigma(3, 1.0, 50, seed=42).points
        second = sample_sigma(3, 1.0, 50, seed=42).points
        assert np.array_equal(first, second)

    def test_constant_integrand_averages_to_one(self):
        sample = sample_sigma(2, 4.0, 500, seed=3)
        assert np.mean(np.ones(len(sample))) == 1.0

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            sample_sigma(0, 1.0, 10, seed=0)
        with pytest.raises(ValueError):
            sample_sigma(2, -1.0, 10, seed=0)
        with pytest.raises(ValueError):
            sample_sigma(2, 1.0, 0, seed=0)

    @pytest.mark.numerics
    def test_first_coordinate_uniform_in_two_dimensions(self):
        """
        For m = 2 the normalized |z1|²/r² is uniform on [0, 1].
        """
        sample = sample_sigma(2, 3.0, 10_000, seed=7)
        u = np.abs(sample.points[:, 0]) ** 2 / 9.0
        assert stats.kstest(u, "uniform").statistic <= 0.02

    @pytest.mark.numerics
    def test_first_coordinate_beta_in_three_dimensions(self):
        sample = sample_sigma(3, 1.0, 10_000, seed=8)
        u = np.abs(sample.points[:, 0]) ** 2
        assert stats.kstest(u, "beta", args=(1, 2)).pvalue > 0.01

    @pytest.mark.numerics
    def test_mean_of_circle_is_zero(self):
        count = 20_000
        sample = sample_sigma(1, 2.0, count, seed=9)
        assert abs(np.mean(sample.points[:, 0] / 2.0)) <= 3 / math.sqrt(count)

    @pytest.mark.numerics
    def test_unitary_invariance(self):
        """
        A fixed unitary map leaves the law of |<c, z>| unchanged.
        """
        c = np.array([1.0, 2.0 - 1j, 0.5j])
        u = stats.unitary_group.rvs(3, random_state=11)
        plain = np.abs(sample_sigma(3, 1.0, 2000, seed=12).points @ c)
        rotated = np.abs((sample_sigma(3, 1.0, 2000, seed=13).points @ u.T) @ c)
        assert stats.ks_2samp(plain, rotated).pvalue > 0.01


class TestGuardedLogModulus:
    """log_modulus and its rounding brackets."""

    def test_exact_values(self):
        f = make_polynomial(2, [((1, 1), 2)])
        guarded = log_modulus(f, [[1, 1], [2, 0.5j]])
        assert guarded.log_abs == pytest.approx([math.log(2), math.log(2)])
        assert guarded.reliable.all()
        assert np.all(guarded.lower <= guarded.log_abs)
        assert np.all(guarded.log_abs <= guarded.upper)

    def test_zero_value_is_minus_infinity(self):
        f = make_polynomial(2, [((1, 0), 1)])
        guarded = log_modulus(f, [[0, 1]])
        assert guarded.log_abs[0] == -math.inf
        assert guarded.reliable[0]

    def test_cancellation_is_flagged(self):
        exp_sum = make_exp_of_linear((1, 1), 120)
        f = PowerSeries(2, exp_sum.coefficients, exp_sum.truncation_degree)
        guarded = log_modulus(f, [[-20, -20], [3, 3]])
        assert not guarded.reliable[0]
        assert guarded.lower[0] == -math.inf
        assert guarded.reliable[1]

    def test_closed_form_survives_cancellation(self):
        f = make_exp_of_linear((1, 1), 120)
        guarded = log_modulus(f, [[-20, -20], [3, 3]])
        assert guarded.reliable.all()
        assert guarded.log_abs == pytest.approx([-40.0, 6.0], rel=1e-12)
        assert np.all(guarded.upper - guarded.lower < 1e-10)

    def test_scaled_closed_form(self):
        f = scale(make_exp_of_linear((1, 1), 60), 2.0)
        guarded = log_modulus(f, [[-10, -10]])
        assert guarded.log_abs[0] == pytest.approx(math.log(2.0) - 20.0, rel=1e-12)

    def test_log_plus_brackets_settle_small_majorants(self):
        f = make_polynomial(2, [((1, 0), 1), ((0, 0), -1)])
        clipped = log_modulus(f, [[1, 0], [2.0, 0.0]]).clipped()
        assert np.all(clipped.lower == 0.0)
        assert clipped.upper == pytest.approx([0.0, 0.0], abs=1e-11)

    def test_quotient_with_vanishing_denominator(self):
        q = Quotient(PowerSeries.constant(2, 1.0), make_polynomial(2, [((1, 0), 1)]))
        guarded = log_modulus(q, [[0, 1], [2, 0]])
        assert not guarded.reliable[0]
        assert guarded.upper[0] == math.inf
        assert guarded.reliable[1]
        assert guarded.log_abs[1] == pytest.approx(-math.log(2))

    def test_resampling_replaces_unusable_directions(self):
        calls = []

        def values_at(directions):
            calls.append(len(directions))
            usable = np.abs(directions[:, 0]) ** 2 > 0.5
            return np.abs(directions[:, 0]), usable

        values, usable = sample_until_usable(2, 200, seed=4, values_at=values_at)
        assert len(values) == 200
        assert calls[0] == 200
        assert len(calls) > 1
        assert usable.mean() > 0.99


class TestRadiusSeeds:
    """seeded_radii."""

    def test_one_distinct_seed_per_radius(self):
        pairs = seeded_radii([2.0, 3.0, 4.5, 6.0], seed=7)
        assert [r for r, _ in pairs] == [2.0, 3.0, 4.5, 6.0]
        assert len({s for _, s in pairs}) == 4

    def test_prefix_stable(self):
        short = seeded_radii([2.0, 3.0], seed=7)
        long = seeded_radii([2.0, 3.0, 4.5, 6.0], seed=7)
        assert long[:2] == short

    def test_depends_on_seed(self):
        assert seeded_radii([2.0], seed=1) != seeded_radii([2.0], seed=2)


class TestMaximumModulus:
    """max_modulus_sphere / max_modulus_torus."""

    @pytest.fixture
    def exp_sum(self):
        return make_exp_of_linear((1, 1), 40)

    def test_coordinate_function_on_sphere(self):
        z1 = make_polynomial(2, [((1, 0), 1)])
        value, point = max_modulus_sphere(z1, 3.0, restarts=4, seed=0)
        assert value == pytest.approx(math.log(3.0), abs=1e-4)
        assert abs(point[0]) == pytest.approx(3.0, rel=1e-3)

    def test_exponential_on_sphere(self, exp_sum):
        value, _ = max_modulus_sphere(exp_sum, 3.0, restarts=4, seed=0)
        assert value == pytest.approx(math.sqrt(2) * 3.0, rel=1e-3)

    def test_constant_on_sphere(self):
        value, _ = max_modulus_sphere(PowerSeries.constant(2, -4.0), 10.0, restarts=2)
        assert value == pytest.approx(math.log(4.0))

    def test_zero_series_on_sphere(self):
        value, point = max_modulus_sphere(PowerSeries.zero(2), 2.0, restarts=2)
        assert value == -math.inf
        assert np.linalg.norm(point) == pytest.approx(2.0)

    def test_more_restarts_never_worse(self):
        rng = np.random.default_rng(21)
        terms = [((a, b), complex(rng.normal(), rng.normal()))
                 for a in range(4) for b in range(4 - a)]
        f = make_polynomial(2, terms)
        few, _ = max_modulus_sphere(f, 1.5, restarts=2, seed=5)
        many, _ = max_modulus_sphere(f, 1.5, restarts=8, seed=5)
        assert many >= few

    def test_untrusted_radius_refused(self):
        f = make_exp_of_linear((1, 1), 20)
        with pytest.raises(UntrustedRadiusError):
            max_modulus_sphere(f, 20.0, restarts=2)

    def test_exponential_on_torus(self, exp_sum):
        value, torus_point = max_modulus_torus(exp_sum, 3.0, restarts=4, seed=0)
        assert value == pytest.approx(6.0, rel=1e-6)
        assert all(phase_distance(p, 0.0) < 1e-2 for p in torus_point.phases)

    def test_product_on_torus(self):
        f = make_polynomial(2, [((1, 1), 1)])
        value, _ = max_modulus_torus(f, 4.0, restarts=2)
        assert value == pytest.approx(2 * math.log(4.0))

    def test_opposite_signs_on_torus(self):
        f = make_exp_of_linear((1, -1), 40)
        value, torus_point = max_modulus_torus(f, 3.0, restarts=4, seed=1)
        assert value == pytest.approx(6.0, rel=1e-6)
        assert phase_distance(torus_point.phases[0], 0.0) < 1e-2
        assert phase_distance(torus_point.phases[1], math.pi) < 1e-2

    @pytest.mark.parametrize("series", [
        make_exp_of_linear((1, 2), 60),
        make_polynomial(2, [((3, 0), 1)]),
    ])
    def test_torus_below_enclosing_sphere(self, series):
        r = 2.0
        torus, torus_point = max_modulus_torus(series, r, restarts=4)
        sphere, _ = max_modulus_sphere(series, torus_point.norm, restarts=4)
        assert torus <= sphere + 1e-6
