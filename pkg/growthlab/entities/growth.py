import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from growthlab.config.settings import settings


@dataclass(frozen=True)
class TrustPolicy:
    """Rule deciding whether a truncated series can be used at a radius."""

    margin: int = 10
    decay_ratio: float = 0.5

    @classmethod
    def from_settings(cls) -> "TrustPolicy":
        return cls(margin=settings.trust_margin, decay_ratio=settings.trust_decay_ratio)


@dataclass(frozen=True)
class RadiusGrid:
    """Geometric grid r_k = r0·q^k, k = 0..K, living in (1, ∞)."""

    r0: float
    q: float
    steps: int

    def __post_init__(self):
        if not self.r0 > 1:
            raise ValueError(f"Grid radii must exceed 1, got r0={self.r0}")
        if not self.q > 1:
            raise ValueError(f"Grid ratio must exceed 1, got q={self.q}")
        if self.steps < 0:
            raise ValueError(f"Grid needs K >= 0 steps, got {self.steps}")

    @classmethod
    def spanning(cls, r_min: float, r_max: float, points: int) -> "RadiusGrid":
        """Grid with the given number of points from r_min to r_max."""
        if points < 2:
            raise ValueError("A spanning grid needs at least two points")
        return cls(r_min, (r_max / r_min) ** (1.0 / (points - 1)), points - 1)

    @property
    def radii(self) -> Tuple[float, ...]:
        return tuple(self.r0 * self.q ** k for k in range(self.steps + 1))

    @property
    def log_length(self) -> float:
        return self.steps * math.log(self.q)

    def __len__(self) -> int:
        return self.steps + 1


@dataclass(frozen=True)
class MonteCarloEstimate:
    """
    Mean over σ-samples with its standard error.

    ``rejected`` counts samples left out of the mean (underflowed log-moduli);
    ``bias_bound`` is the mean half-width of the rounding brackets, a bound on
    how far rounding can have moved ``value``.
    """

    value: float
    std_error: float
    rejected: int = 0
    count: int = 0
    bias_bound: float = 0.0


@dataclass
class GrowthProfile:
    """Growth quantities of one function at one radius."""

    radius: float
    log_max_term: float
    central_index: int
    trusted: bool
    log_M_sphere: float = math.nan
    log_M_torus: float = math.nan
    proximity: float = math.nan
    proximity_stderr: float = math.nan
    valence: float = math.nan
    valence_stderr: float = math.nan
    seed: Optional[int] = None

    def to_row(self) -> List:
        return [
            self.radius,
            self.log_max_term,
            self.central_index,
            self.log_M_sphere,
            self.log_M_torus,
            self.proximity,
            self.proximity_stderr,
            self.valence,
            self.trusted,
            self.seed,
        ]


PROFILE_COLUMNS = [
    "r", "log_max_term", "central_index", "log_M_sphere", "log_M_torus",
    "proximity", "proximity_stderr", "valence", "trusted", "seed",
]

