"""
Tests for the maximum-term / maximum-modulus comparisons and the
Wiman–Valiron ratio at torus maxima.
"""

import math

import pytest

from growthlab.entities.growth import RadiusGrid
from growthlab.entities.multi_index import MultiIndex
from growthlab.entities.power_series import PowerSeries
from growthlab.entities.reports import WVRecord
from growthlab.services.errors import PreconditionError
from growthlab.services.series_core import make_exp_of_linear, make_polynomial
from growthlab.services.wiman_valiron_lab import (
    eta_decay,
    exceptional_set_estimate,
    fitted_decay_constant,
    verify_cauchy_torus,
    verify_lemma32,
    verify_t31,
    verify_t32,
    verify_t33,
    wv_ratio_check,
)

E1 = MultiIndex((1, 0))


def wv_record(r: float, eta: float, condition_ok: bool = True) -> WVRecord:
    return WVRecord(radius=r, phases=(0.0, 0.0), condition_ok=condition_ok, eta=eta,
                    log_f_at_zr=0.0, log_M_sphere_sqrtm_r=0.0, central_index=4, delta=0.1)


class TestMaxTermVersusMaxModulus:
    """verify_t31 / verify_t32 / verify_cauchy_torus / verify_lemma32."""

    @pytest.fixture
    def exp_sum(self):
        return make_exp_of_linear((1, 1), 80)

    def test_t31_exponential(self, exp_sum):
        grid = RadiusGrid.spanning(1.5, 10, 8)
        report = verify_t31(exp_sum, grid, restarts=3, seed=1)
        assert report.theorem == "T31"
        assert report.all_satisfied
        assert report.threshold == pytest.approx(1.5)

    @pytest.mark.parametrize("series", [
        PowerSeries.constant(2, 3.0),
        make_polynomial(2, [((1, 0), 1)]),
        make_polynomial(2, [((3, 0), 1), ((0, 3), 1)]),
    ])
    def test_t31_exact_series(self, series):
        report = verify_t31(series, RadiusGrid(1.0 + 1e-9, 2.0, 5), restarts=2)
        assert report.all_satisfied

    def test_t32_exponential(self, exp_sum):
        report = verify_t32(exp_sum, RadiusGrid.spanning(1.5, 8, 6), restarts=3, seed=1)
        assert report.theorem == "T32"
        assert report.all_satisfied
        assert report.notes

    def test_t32_polynomial(self):
        p = make_polynomial(2, [((3, 0), 1), ((0, 3), 1)])
        report = verify_t32(p, RadiusGrid(1.5, 2.0, 5), restarts=8)
        assert report.all_satisfied
        for record in report.records:
            assert record.lhs_log == pytest.approx(3 * math.log(record.radius), abs=1e-4)

    def test_t32_needs_larger_outer_radius(self, exp_sum):
        with pytest.raises(PreconditionError):
            verify_t32(exp_sum, RadiusGrid(1.5, 2.0, 2), R_factor=1.0)

    def test_cauchy_on_torus(self):
        f = make_exp_of_linear((1, 1), 60)
        report = verify_cauchy_torus(f, RadiusGrid.spanning(1.5, 6, 4), restarts=3)
        assert report.all_satisfied

    @pytest.mark.numerics
    def test_characteristic_brackets_max_modulus(self):
        f = make_exp_of_linear((1, 1), 60)
        report = verify_lemma32(f, RadiusGrid.spanning(1.5, 5, 4), count=2000, seed=2, restarts=3)
        assert report.theorem == "L32"
        assert report.all_satisfied
        for record in report.records:
            assert record.core_log <= record.lhs_log + 0.05


class TestOrderAgreement:
    """verify_t33."""

    def test_polynomial(self):
        p = make_polynomial(2, [((2, 0), 1), ((0, 3), 1)])
        agreement = verify_t33(p, RadiusGrid.spanning(1e4, 1e8, 12), restarts=2)
        assert all(estimate <= 0.1 for estimate in agreement.estimates)

    @pytest.mark.slow
    def test_exponential(self):
        f = make_exp_of_linear((1, 1), 160)
        agreement = verify_t33(f, RadiusGrid.spanning(10, 36, 12), restarts=2, seed=3)
        assert agreement.max_difference <= 0.2
        assert agreement.via_max_modulus == pytest.approx(1.0, abs=0.1)


class TestWimanValironRatio:
    """wv_ratio_check and its summaries."""

    @pytest.mark.slow
    def test_exponential_ratio_settles(self):
        f = make_exp_of_linear((1, 1), 130)
        grid = RadiusGrid.spanning(3.1, 20, 12)
        records = wv_ratio_check(f, E1, (1, 1), grid, delta=0.1, restarts=3, seed=4)
        assert all(record.trusted and record.valid for record in records)
        assert all(record.condition_ok for record in records)
        top, bottom = eta_decay(records)
        assert top < 0.1
        assert top < bottom
        assert exceptional_set_estimate(records) < 0.2 * grid.log_length
        assert math.isfinite(fitted_decay_constant(records))

    def test_second_order_index(self):
        f = make_exp_of_linear((1, 1), 100)
        records = wv_ratio_check(f, MultiIndex((1, 1)), (1, 1), RadiusGrid(8.0, 1.2, 3),
                                 restarts=2, seed=5)
        for record in records:
            assert record.eta <= 2.5 / record.central_index

    @pytest.mark.slow
    def test_three_variables(self):
        f = make_exp_of_linear((1, 1, 1), 52)
        records = wv_ratio_check(f, MultiIndex((1, 0, 0)), (1, 1, 1), RadiusGrid(2.5, 1.2, 2),
                                 restarts=1, seed=6)
        for record in records:
            assert record.condition_ok
            assert record.eta <= 1.5 / record.central_index

    def test_power_of_one_coordinate_fails_condition(self):
        f = make_polynomial(2, [((8, 0), 1)])
        records = wv_ratio_check(f, E1, (1, 1), RadiusGrid(2.0, 1.5, 3), restarts=2)
        assert not any(record.condition_ok for record in records)

    def test_untrusted_radius_marked(self):
        f = make_exp_of_linear((1, 1), 30)
        records = wv_ratio_check(f, E1, (1, 1), RadiusGrid(2.0, 3.0, 2), restarts=2)
        assert not records[-1].trusted
        assert not records[-1].violates(0.1)

    def test_zero_linear_form(self):
        with pytest.raises(PreconditionError):
            wv_ratio_check(make_exp_of_linear((1, 1), 30), E1, (0, 0), RadiusGrid(2.0, 1.5, 2))

    def test_partly_zero_linear_form(self):
        with pytest.raises(PreconditionError):
            wv_ratio_check(make_exp_of_linear((1, 1), 30), E1, (1, 0), RadiusGrid(2.0, 1.5, 2))

    @pytest.mark.parametrize("delta", [0.0, 0.25, 0.3])
    def test_delta_range(self, delta):
        with pytest.raises(PreconditionError):
            wv_ratio_check(make_exp_of_linear((1, 1), 30), E1, (1, 1), RadiusGrid(2.0, 1.5, 2),
                           delta=delta)


class TestExceptionalSet:
    """exceptional_set_estimate on hand-made records."""

    def test_no_violations(self):
        records = [wv_record(r, 0.01) for r in (2.0, 4.0, 8.0)]
        assert exceptional_set_estimate(records) == 0.0

    def test_every_violation(self):
        records = [wv_record(r, 0.5) for r in (2.0, 4.0, 8.0)]
        assert exceptional_set_estimate(records) == pytest.approx(math.log(4.0))

    def test_first_interval(self):
        records = [wv_record(2.0, 0.5), wv_record(4.0, 0.01), wv_record(8.0, 0.01)]
        assert exceptional_set_estimate(records) == pytest.approx(math.log(2.0))

    def test_failed_condition_counts(self):
        records = [wv_record(2.0, 0.01, condition_ok=False), wv_record(4.0, 0.01)]
        assert exceptional_set_estimate(records) == pytest.approx(math.log(2.0))

    def test_decay_summary(self):
        records = [wv_record(r, 1.0 / r) for r in (2.0, 4.0, 8.0, 16.0)]
        top, bottom = eta_decay(records)
        assert top == pytest.approx(1 / 16)
        assert bottom == pytest.approx(1 / 2)
        assert fitted_decay_constant(records) == pytest.approx(1.0)
