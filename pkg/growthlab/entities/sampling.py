from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass(frozen=True)
class SphereSample:
    """Points of S(r) = {‖z‖ = r} drawn from the invariant probability measure σ."""

    points: np.ndarray
    radius: float
    seed: int

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.points.shape[1])


@dataclass(frozen=True)
class TorusPoint:
    """A point of the determining torus C^m_(0)(r): z_j = r·e^{iθ_j}."""

    phases: Tuple[float, ...]
    radius: float

    @property
    def point(self) -> np.ndarray:
        return self.radius * np.exp(1j * np.asarray(self.phases, dtype=float))

    @property
    def norm(self) -> float:
        return float(np.sqrt(len(self.phases)) * self.radius)
