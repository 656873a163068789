from typing import Iterable, Tuple


class DimensionMismatchError(ValueError):
    """Raised when multi-indices, points or series disagree on the dimension m."""


class DuplicateIndexError(ValueError):
    """Raised when a constructor receives the same multi-index twice."""


class DegenerateSeriesError(ValueError):
    """Raised when an operation needs a non-zero (or non-constant) series."""


class PreconditionError(ValueError):
    """Raised when the arguments violate an operation's precondition."""


class UnknownFamilyError(ValueError):
    """Raised for a function family name that has no generator."""


class InsufficientDataError(ValueError):
    """Raised when an estimator has fewer trusted radii than it needs."""


class UntrustedRadiusError(ValueError):
    """Raised when a radius lies outside the trusted range of a truncated series."""

    def __init__(self, radii: Iterable[float], detail: str = ""):
        self.radii: Tuple[float, ...] = tuple(float(r) for r in radii)
        listed = ", ".join(f"{r:.6g}" for r in self.radii)
        message = f"Untrusted radii: {listed}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class VanishingDenominatorError(ArithmeticError):
    """Raised when a quotient's denominator vanishes numerically at every sample."""


class InfiniteOrderError(ArithmeticError):
    """Raised when an order estimate diverges and a finite order is required."""


class UnresolvedRadiusError(UntrustedRadiusError):
    """Raised when rounding error leaves a sphere integral undetermined at a radius."""


class NumericPreconditionError(ArithmeticError):
    """Raised when a computed quantity breaks the precondition of a check."""
