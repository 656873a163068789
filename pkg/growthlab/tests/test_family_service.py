"""
Tests for building family members from names and parameters.
"""

import math

import pytest

from growthlab.entities.multi_index import MultiIndex
from growthlab.services.errors import PreconditionError, UnknownFamilyError
from growthlab.services.family_service import FamilyService
from growthlab.services.series_core import homogeneous_l1_norms


@pytest.fixture
def service():
    return FamilyService()


class TestFamilyService:
    """FamilyService.build / build_pde."""

    def test_catalogue(self, service):
        """Test that every family is listed with its schema."""
        names = [schema["name"] for schema in service.list_families()]
        assert len(names) >= 5
        assert "exp_linear" in names

    def test_polynomial(self, service):
        p = service.build("polynomial", 2, 10, {"terms": [
            {"index": [2, 0], "re": 1.0},
            {"index": [0, 1], "re": 0.0, "im": -2.0},
        ]})
        assert p.exact
        assert p.coefficient(MultiIndex((0, 1))) == -2j

    def test_exp_linear_defaults_to_ones(self, service):
        f = service.build("exp_linear", 2, 12)
        norms = homogeneous_l1_norms(f)
        assert norms[5] == pytest.approx(2 ** 5 / math.factorial(5))

    def test_exp_linear_complex_pairs(self, service):
        f = service.build("exp_linear", 2, 6, {"a": [[0.0, 1.0], 2]})
        assert f.coefficient(MultiIndex((1, 0))) == pytest.approx(1j)
        assert f.coefficient(MultiIndex((0, 1))) == pytest.approx(2)

    def test_linear_form_length(self, service):
        with pytest.raises(PreconditionError):
            service.build("exp_linear", 3, 6, {"a": [1, 1]})

    def test_exp_poly(self, service):
        f = service.build("exp_poly", 2, 8, {"terms": [{"index": [2, 0], "re": 1.0}]})
        assert f.coefficient(MultiIndex((4, 0))) == pytest.approx(0.5)
        assert f.coefficient(MultiIndex((1, 0))) == 0

    def test_exp_exp_linear(self, service):
        f = service.build("exp_exp_linear", 2, 10, {"a": [1, 0]})
        assert f.constant_term == pytest.approx(math.e)

    def test_pde_solution(self, service):
        instance, solution = service.build_pde(2, 30, {"P": [{"index": [1, 0], "re": 1.0}]})
        assert instance.order == 1
        assert instance.Q.is_zero
        assert solution.constant_term == pytest.approx(1.0)

    def test_pde_solution_higher_order(self, service):
        instance, _ = service.build_pde(2, 30, {"P": [{"index": [1, 0], "re": 1.0}], "order": 2})
        assert instance.order == 2
        assert not instance.Q.is_zero

    def test_unknown_family(self, service):
        with pytest.raises(UnknownFamilyError):
            service.build("nonexistent", 2, 10)
