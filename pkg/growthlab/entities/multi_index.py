from dataclasses import dataclass
from typing import Iterable, Tuple

from growthlab.services.errors import DimensionMismatchError


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Exponent vector α ∈ Z_+^m; orders by (degree, exponents)."""

    degree: int
    exponents: Tuple[int, ...]

    def __init__(self, exponents: Iterable[int]):
        values = tuple(int(e) for e in exponents)
        if len(values) < 1:
            raise ValueError("A multi-index needs dimension m >= 1")
        if any(e < 0 for e in values):
            raise ValueError(f"Exponents must be non-negative: {values}")
        object.__setattr__(self, "exponents", values)
        object.__setattr__(self, "degree", sum(values))

    @classmethod
    def zero(cls, dimension: int) -> "MultiIndex":
        return cls((0,) * dimension)

    @classmethod
    def unit(cls, dimension: int, axis: int, power: int = 1) -> "MultiIndex":
        """The index of z_{axis}^{power} (axis counted from 0)."""
        values = [0] * dimension
        values[axis] = power
        return cls(values)

    @property
    def dimension(self) -> int:
        return len(self.exponents)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        self._check_dimension(other)
        return MultiIndex(a + b for a, b in zip(self.exponents, other.exponents))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        self._check_dimension(other)
        return MultiIndex(a - b for a, b in zip(self.exponents, other.exponents))

    def dominates(self, other: "MultiIndex") -> bool:
        """True when every exponent is >= the matching exponent of other."""
        self._check_dimension(other)
        return all(a >= b for a, b in zip(self.exponents, other.exponents))

    def _check_dimension(self, other: "MultiIndex") -> None:
        if self.dimension != other.dimension:
            raise DimensionMismatchError(
                f"Multi-index dimensions differ: {self.dimension} vs {other.dimension}")

    def __repr__(self) -> str:
        return f"MultiIndex{self.exponents}"
