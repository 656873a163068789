from dataclasses import dataclass
from typing import Optional

from growthlab.entities.multi_index import MultiIndex
from growthlab.entities.power_series import PowerSeries
from growthlab.services.errors import PreconditionError


@dataclass(frozen=True)
class PdeInstance:
    """∂^I f − e^{P} f = Q with I = (k, 0, …, 0) and non-constant polynomial P."""

    dimension: int
    index: MultiIndex
    P: PowerSeries
    Q: PowerSeries
    truncation_degree: int
    initial_stratum: Optional[PowerSeries] = None

    def __post_init__(self):
        if self.index.dimension != self.dimension:
            raise PreconditionError("Derivative index has the wrong dimension")
        if any(self.index.exponents[1:]) or self.index.degree < 1:
            raise PreconditionError(
                f"Only I = (k, 0, ..., 0) with k >= 1 is supported, got {self.index}")
        if self.P.dimension != self.dimension or self.Q.dimension != self.dimension:
            raise PreconditionError("P and Q must share the instance dimension")
        if self.P.is_constant:
            raise PreconditionError("P must be non-constant")
        if not self.P.exact:
            raise PreconditionError("P must be a polynomial")

    @property
    def order(self) -> int:
        return self.index.degree

    @property
    def degree_P(self) -> int:
        return self.P.degree
