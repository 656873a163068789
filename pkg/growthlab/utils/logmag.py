"""
Split-magnitude arithmetic.

Values that can overflow a double (M(r) of exp(z₁+z₂) is e^{√2 r}) are
carried as ``mantissa · exp(log_scale)``. Comparisons and ratios work on
``log_abs`` so nothing is ever exponentiated back unless it fits.
"""

import math
from typing import NamedTuple

import numpy as np

LOG_ZERO = float("-inf")


class SplitComplex(NamedTuple):
    mantissa: complex
    log_scale: float

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0 or self.log_scale == LOG_ZERO

    @property
    def log_abs(self) -> float:
        if self.is_zero:
            return LOG_ZERO
        return math.log(abs(self.mantissa)) + self.log_scale

    def normalized(self) -> "SplitComplex":
        """Same number with |mantissa| = 1."""
        if self.is_zero:
            return SplitComplex(0j, LOG_ZERO)
        modulus = abs(self.mantissa)
        return SplitComplex(self.mantissa / modulus, self.log_scale + math.log(modulus))

    def to_complex(self) -> complex:
        """Plain complex value; overflows to inf for very large magnitudes."""
        if self.is_zero:
            return 0j
        unit = self.normalized()
        with np.errstate(over="ignore"):
            return complex(unit.mantissa * np.exp(unit.log_scale))

    def __mul__(self, other: "SplitComplex") -> "SplitComplex":
        if self.is_zero or other.is_zero:
            return SplitComplex(0j, LOG_ZERO)
        return SplitComplex(self.mantissa * other.mantissa,
                            self.log_scale + other.log_scale).normalized()

    def __truediv__(self, other: "SplitComplex") -> "SplitComplex":
        if other.is_zero:
            raise ZeroDivisionError("division by a zero split magnitude")
        if self.is_zero:
            return SplitComplex(0j, LOG_ZERO)
        return SplitComplex(self.mantissa / other.mantissa,
                            self.log_scale - other.log_scale).normalized()

    def __pow__(self, exponent: int) -> "SplitComplex":
        if exponent == 0:
            return SplitComplex(1 + 0j, 0.0)
        unit = self.normalized()
        if unit.is_zero:
            return unit
        return SplitComplex(unit.mantissa ** exponent, unit.log_scale * exponent)


def split_sum(*values: SplitComplex) -> SplitComplex:
    """Sum of split-magnitude numbers, rescaled to the largest scale."""
    live = [v for v in values if not v.is_zero]
    if not live:
        return SplitComplex(0j, LOG_ZERO)
    scale = max(v.log_scale for v in live)
    total = complex(sum(v.mantissa * math.exp(v.log_scale - scale) for v in live))
    if total == 0:
        return SplitComplex(0j, LOG_ZERO)
    return SplitComplex(total, scale).normalized()


def log_plus(value: float) -> float:
    """log⁺x = max(0, log x); 0 for x <= 1, including 0 and negative levels."""
    return math.log(value) if value > 1 else 0.0
