from dataclasses import dataclass

from growthlab.entities.power_series import PowerSeries
from growthlab.services.errors import DimensionMismatchError


@dataclass(frozen=True)
class Quotient:
    """Meromorphic function g/h given by a coprime pair of entire series."""

    numerator: PowerSeries
    denominator: PowerSeries

    def __post_init__(self):
        if self.numerator.dimension != self.denominator.dimension:
            raise DimensionMismatchError(
                "Numerator and denominator live in different dimensions")
        if self.denominator.is_zero:
            raise ValueError("Denominator of a quotient must not be the zero series")

    @property
    def dimension(self) -> int:
        return self.numerator.dimension
