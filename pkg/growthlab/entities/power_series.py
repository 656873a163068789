from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Iterator, Mapping, Optional, Tuple

import numpy as np

from growthlab.entities.multi_index import MultiIndex
from growthlab.services.errors import DimensionMismatchError


@dataclass(frozen=True)
class PowerSeries:
    """
    Sparse truncated Taylor series Σ a_α z^α of an entire function on C^m.

    Coefficients of total degree > truncation_degree are absent by
    construction. ``exact`` marks series whose truncation loses nothing
    (polynomials and anything derived from them without exp).
    ``log_closed_form``, when present, maps an (n, m) array of points to
    the complex logarithm of the entire function the series truncates.
    """

    dimension: int
    coefficients: Mapping[MultiIndex, complex] = field(default_factory=dict)
    truncation_degree: int = 0
    exact: bool = False
    log_closed_form: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"Dimension must be >= 1, got {self.dimension}")
        if self.truncation_degree < 0:
            raise ValueError(
                f"Truncation degree must be >= 0, got {self.truncation_degree}")

        canonical: Dict[MultiIndex, complex] = {}
        for index in sorted(self.coefficients):
            if index.dimension != self.dimension:
                raise DimensionMismatchError(
                    f"Index {index} does not have dimension {self.dimension}")
            if index.degree > self.truncation_degree:
                raise ValueError(
                    f"Index {index} exceeds truncation degree {self.truncation_degree}")
            value = complex(self.coefficients[index])
            if value != 0:
                canonical[index] = value
        object.__setattr__(self, "coefficients", canonical)

    @classmethod
    def zero(cls, dimension: int, truncation_degree: int = 0) -> "PowerSeries":
        return cls(dimension, {}, truncation_degree, exact=True)

    @classmethod
    def constant(cls, dimension: int, value: complex) -> "PowerSeries":
        return cls(dimension, {MultiIndex.zero(dimension): value}, 0, exact=True)

    def coefficient(self, index: MultiIndex) -> complex:
        return self.coefficients.get(index, 0j)

    def terms(self) -> Iterator[Tuple[MultiIndex, complex]]:
        """Terms in deterministic order: by degree, then lexicographic."""
        return iter(self.coefficients.items())

    def __len__(self) -> int:
        return len(self.coefficients)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def degree(self) -> int:
        """Largest total degree actually stored (0 for the zero series)."""
        if not self.coefficients:
            return 0
        return max(index.degree for index in self.coefficients)

    @property
    def is_constant(self) -> bool:
        return all(index.degree == 0 for index in self.coefficients)

    @property
    def constant_term(self) -> complex:
        return self.coefficient(MultiIndex.zero(self.dimension))

    # Vectorised views used by evaluation; computed once per instance.

    @cached_property
    def exponent_matrix(self) -> np.ndarray:
        if not self.coefficients:
            return np.zeros((0, self.dimension), dtype=float)
        return np.array([index.exponents for index in self.coefficients], dtype=float)

    @cached_property
    def coefficient_vector(self) -> np.ndarray:
        return np.array(list(self.coefficients.values()), dtype=complex)

    @cached_property
    def log_coefficient_vector(self) -> np.ndarray:
        return np.log(self.coefficient_vector)

    @cached_property
    def degree_vector(self) -> np.ndarray:
        return np.array([index.degree for index in self.coefficients], dtype=int)


@dataclass(frozen=True)
class HomogeneousNorms:
    """‖a_k‖₁ = Σ_{|α|=k} |a_α| for k = 0..D."""

    values: Tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int) -> float:
        return self.values[k]

    @cached_property
    def log_values(self) -> np.ndarray:
        """log ‖a_k‖₁ with −inf for empty degrees."""
        array = np.asarray(self.values, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(array)

    @property
    def is_zero(self) -> bool:
        return not any(self.values)
