import logging
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from growthlab.entities.multi_index import MultiIndex
from growthlab.entities.pde import PdeInstance
from growthlab.entities.power_series import PowerSeries
from growthlab.services.errors import PreconditionError, UnknownFamilyError
from growthlab.services.pde_growth_lab import solve_first_order, tautological_instance
from growthlab.services.series_core import (
    exp_series,
    make_exp_of_linear,
    make_polynomial,
    truncate,
)
from growthlab.utils.family_loader import family_loader

logger = logging.getLogger(__name__)


def _complex(value: Any) -> complex:
    """A number, or an [re, im] pair."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"Complex values are [re, im] pairs, got {value}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def _terms(raw: Optional[Sequence[Mapping[str, Any]]]) -> List[Tuple[MultiIndex, complex]]:
    return [(MultiIndex(term["index"]), complex(float(term.get("re", 0.0)), float(term.get("im", 0.0))))
            for term in raw or []]


class FamilyService:
    """Service layer turning family names and parameters into series."""

    def list_families(self) -> List[dict]:
        """Every built-in family with its parameter schema."""
        return [family_loader.load_schema(name) for name in family_loader.list_available_families()]

    def build(self, name: str, dimension: int, truncation_degree: int,
              parameters: Optional[Dict[str, Any]] = None) -> PowerSeries:
        """The family member as a PowerSeries truncated at ``truncation_degree``."""
        family_loader.load_schema(name)
        parameters = parameters or {}

        if name == "polynomial":
            return make_polynomial(dimension, _terms(parameters.get("terms")))
        if name == "exp_linear":
            return make_exp_of_linear(self._linear_form(parameters, dimension), truncation_degree)
        if name == "exp_poly":
            P = make_polynomial(dimension, _terms(parameters.get("terms")))
            return exp_series(truncate(P, truncation_degree))
        if name == "exp_exp_linear":
            inner = make_exp_of_linear(self._linear_form(parameters, dimension), truncation_degree)
            return exp_series(inner)
        if name == "pde_solution":
            _, solution = self.build_pde(dimension, truncation_degree, parameters)
            return solution
        raise UnknownFamilyError(f"Unknown family: '{name}'")

    def build_pde(self, dimension: int, truncation_degree: int,
                  parameters: Dict[str, Any]) -> Tuple[PdeInstance, PowerSeries]:
        """
        Instance and solution for ∂^I f − e^P f = Q, I = (k, 0, …, 0).

        k = 1 is solved from P, Q and the initial stratum; for k > 1 the
        first-order solution is reused as f and Q is redefined from it.
        """
        order = int(parameters.get("order", 1))
        if order < 1:
            raise PreconditionError(f"Derivative order must be >= 1, got {order}")
        P = make_polynomial(dimension, _terms(parameters.get("P")))
        Q = make_polynomial(dimension, _terms(parameters.get("Q")))
        initial = make_polynomial(dimension, _terms(parameters["initial"])) \
            if parameters.get("initial") else None

        first = PdeInstance(dimension, MultiIndex.unit(dimension, 0), P, Q,
                            truncation_degree, initial)
        solution = solve_first_order(first)
        if order == 1:
            return first, solution
        logger.info("pde_solution: order %d built tautologically", order)
        return tautological_instance(solution, P, MultiIndex.unit(dimension, 0, order)), solution

    @staticmethod
    def _linear_form(parameters: Dict[str, Any], dimension: int) -> List[complex]:
        a = [_complex(value) for value in parameters.get("a", [1.0] * dimension)]
        if len(a) != dimension:
            raise PreconditionError(f"Linear form needs {dimension} coefficients, got {len(a)}")
        return a
