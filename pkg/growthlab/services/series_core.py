"""
Sparse multivariate truncated power series.

Construction, arithmetic, exp, multi-index differentiation, homogeneous ℓ¹
norms, split-magnitude evaluation and the truncation trust rule. Every
function is pure; PowerSeries instances are never mutated.
"""

import cmath
import logging
import math
from collections import defaultdict
from itertools import groupby
from typing import (
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
from scipy.special import logsumexp

from growthlab.entities.growth import TrustPolicy
from growthlab.entities.multi_index import MultiIndex
from growthlab.entities.power_series import HomogeneousNorms, PowerSeries
from growthlab.services.errors import (
    DimensionMismatchError,
    DuplicateIndexError,
    UntrustedRadiusError,
)
from growthlab.utils.logmag import LOG_ZERO, SplitComplex

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]
Homogeneous = Dict[Exponents, complex]
LogForm = Callable[[np.ndarray], np.ndarray]

# Upper bound on (terms × points) per vectorised evaluation chunk.
_CHUNK_CELLS = 2_000_000
# Relative tolerance, in log space, for ties between degree terms.
_TIE_TOLERANCE = 1e-12
# Largest distance, in log space, between the summation scale and the largest term.
_SCALE_HEADROOM = 600.0


# =========================================================================
# CONSTRUCTORS
# =========================================================================

def make_polynomial(dimension: int,
                    terms: Iterable[Tuple[Union[MultiIndex, Sequence[int]], complex]]) -> PowerSeries:
    """Exact polynomial from (index, coefficient) pairs; duplicates are rejected."""
    coefficients: Dict[MultiIndex, complex] = {}
    for raw_index, value in terms:
        index = raw_index if isinstance(raw_index, MultiIndex) else MultiIndex(raw_index)
        if index.dimension != dimension:
            raise DimensionMismatchError(
                f"Index {index} has dimension {index.dimension}, expected {dimension}")
        if index in coefficients:
            raise DuplicateIndexError(f"Index {index} given more than once")
        coefficients[index] = complex(value)

    nonzero = {index: value for index, value in coefficients.items() if value != 0}
    degree = max((index.degree for index in nonzero), default=0)
    return PowerSeries(dimension, nonzero, degree, exact=True)


def indices_up_to(dimension: int, degree: int) -> Iterator[Exponents]:
    """All exponent vectors of total degree <= degree, by degree then lexicographic."""
    for total in range(degree + 1):
        yield from _compositions(total, dimension)


def _compositions(total: int, parts: int) -> Iterator[Exponents]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def make_exp_of_linear(a: Sequence[complex], truncation_degree: int) -> PowerSeries:
    """Taylor series of exp(a₁z₁ + … + a_m z_m): coefficient Π a_j^{α_j}/α_j!."""
    if truncation_degree < 0:
        raise ValueError(f"Truncation degree must be >= 0, got {truncation_degree}")
    a = [complex(value) for value in a]
    dimension = len(a)
    if all(value == 0 for value in a):
        return PowerSeries(dimension, {MultiIndex.zero(dimension): 1.0},
                           truncation_degree, exact=True)

    # Powers a_j^k / k! tabulated once per variable.
    tables = []
    for value in a:
        row = [1.0 + 0j]
        for k in range(1, truncation_degree + 1):
            row.append(row[-1] * value / k)
        tables.append(row)

    coefficients: Dict[MultiIndex, complex] = {}
    for exponents in indices_up_to(dimension, truncation_degree):
        value = 1.0 + 0j
        for j, e in enumerate(exponents):
            value *= tables[j][e]
        if value != 0:
            coefficients[MultiIndex(exponents)] = value

    linear = np.asarray(a, dtype=complex)
    return PowerSeries(dimension, coefficients, truncation_degree,
                       log_closed_form=lambda points: points @ linear)


def truncate(s: PowerSeries, truncation_degree: int) -> PowerSeries:
    """
    Re-truncate at a new degree. Lowering drops terms (and exactness when any
    term is lost); raising is only allowed for exact series.
    """
    if truncation_degree > s.truncation_degree and not s.exact:
        raise ValueError(
            f"Cannot extend an inexact series from degree {s.truncation_degree} to {truncation_degree}")
    kept = {index: value for index, value in s.terms() if index.degree <= truncation_degree}
    exact = s.exact and len(kept) == len(s)
    return PowerSeries(s.dimension, kept, truncation_degree, exact=exact,
                       log_closed_form=s.log_closed_form)


# =========================================================================
# ARITHMETIC
# =========================================================================

def _check_dimensions(s: PowerSeries, t: PowerSeries) -> None:
    if s.dimension != t.dimension:
        raise DimensionMismatchError(
            f"Series dimensions differ: {s.dimension} vs {t.dimension}")


def _combined_truncation(s: PowerSeries, t: PowerSeries, exact_degree: int) -> Tuple[int, bool]:
    inexact = [u.truncation_degree for u in (s, t) if not u.exact]
    if not inexact:
        return exact_degree, True
    return min(inexact), False


def add(s: PowerSeries, t: PowerSeries) -> PowerSeries:
    _check_dimensions(s, t)
    degree, exact = _combined_truncation(s, t, max(s.truncation_degree, t.truncation_degree))

    total: Dict[MultiIndex, complex] = defaultdict(complex)
    for series in (s, t):
        for index, value in series.terms():
            if index.degree <= degree:
                total[index] += value
    return PowerSeries(s.dimension, total, degree, exact=exact)


def scale(s: PowerSeries, c: complex) -> PowerSeries:
    c = complex(c)
    if c == 0:
        return PowerSeries(s.dimension, {}, s.truncation_degree, exact=s.exact)
    closed_form = None
    if s.log_closed_form is not None:
        closed_form = _shifted_log(s.log_closed_form, cmath.log(c))
    return PowerSeries(s.dimension, {index: c * value for index, value in s.terms()},
                       s.truncation_degree, exact=s.exact, log_closed_form=closed_form)


def _shifted_log(log_form: LogForm, shift: complex) -> LogForm:
    return lambda points: shift + log_form(points)


def subtract(s: PowerSeries, t: PowerSeries) -> PowerSeries:
    return add(s, scale(t, -1.0))


def mul(s: PowerSeries, t: PowerSeries) -> PowerSeries:
    """Cauchy product; exact factors keep every term, else truncate at the inexact D."""
    _check_dimensions(s, t)
    degree, exact = _combined_truncation(s, t, s.truncation_degree + t.truncation_degree)

    right = [(index.degree, index.exponents, value) for index, value in t.terms()]
    product: Dict[Exponents, complex] = defaultdict(complex)
    for index, left_value in s.terms():
        budget = degree - index.degree
        if budget < 0:
            break
        for right_degree, right_exponents, right_value in right:
            if right_degree > budget:
                break
            key = tuple(a + b for a, b in zip(index.exponents, right_exponents))
            product[key] += left_value * right_value

    return PowerSeries(s.dimension, {MultiIndex(k): v for k, v in product.items()},
                       degree, exact=exact)


def _homogeneous_parts(s: PowerSeries) -> List[Homogeneous]:
    parts: List[Homogeneous] = [dict() for _ in range(s.truncation_degree + 1)]
    for index, value in s.terms():
        parts[index.degree][index.exponents] = value
    return parts


def exp_series(g: PowerSeries) -> PowerSeries:
    """
    exp(g) up to degree D = g.truncation_degree; the closed form log f = g is
    kept when g can be evaluated exactly.

    Homogeneous parts h_k follow from the Euler-operator form of ∂h = h·∂g:
    k·h_k = Σ_{j=1..k} j·g_j·h_{k−j}, seeded with h_0 = exp(g_0).
    """
    degree = g.truncation_degree
    g_parts = _homogeneous_parts(g)
    g0 = g_parts[0].get((0,) * g.dimension, 0j)

    if g.is_constant:
        return PowerSeries(g.dimension, {MultiIndex.zero(g.dimension): cmath.exp(g0)},
                           degree, exact=True)

    live_degrees = [j for j in range(1, degree + 1) if g_parts[j]]
    h_parts: List[Homogeneous] = [{(0,) * g.dimension: cmath.exp(g0)}]
    for k in range(1, degree + 1):
        part: Homogeneous = defaultdict(complex)
        for j in live_degrees:
            if j > k:
                break
            for g_exponents, g_value in g_parts[j].items():
                weighted = j * g_value
                for h_exponents, h_value in h_parts[k - j].items():
                    key = tuple(a + b for a, b in zip(g_exponents, h_exponents))
                    part[key] += weighted * h_value
        h_parts.append({key: value / k for key, value in part.items()})

    coefficients = {MultiIndex(exponents): value
                    for part in h_parts for exponents, value in part.items()}
    logger.debug("exp_series: %d terms up to degree %d", len(coefficients), degree)
    return PowerSeries(g.dimension, coefficients, degree, log_closed_form=_value_function(g))


# =========================================================================
# CALCULUS
# =========================================================================

def partial_derivative(s: PowerSeries, index: MultiIndex) -> PowerSeries:
    """∂^I s term by term; truncation degree drops by |I| (floor 0)."""
    if index.dimension != s.dimension:
        raise DimensionMismatchError(
            f"Derivative index {index} does not match dimension {s.dimension}")
    if index.degree == 0:
        return s

    derived: Dict[MultiIndex, complex] = {}
    for alpha, value in s.terms():
        if not alpha.dominates(index):
            continue
        factor = 1
        for a, i in zip(alpha.exponents, index.exponents):
            factor *= math.perm(a, i)
        derived[alpha - index] = value * factor

    degree = max(0, s.truncation_degree - index.degree)
    return PowerSeries(s.dimension, derived, degree, exact=s.exact)


def antiderivative_z1(s: PowerSeries) -> PowerSeries:
    """Antiderivative in z₁ with zero constant of integration."""
    shift = MultiIndex.unit(s.dimension, 0)
    integrated = {alpha + shift: value / (alpha.exponents[0] + 1) for alpha, value in s.terms()}
    return PowerSeries(s.dimension, integrated, s.truncation_degree + 1, exact=s.exact)


# =========================================================================
# NORMS AND DEGREE TERMS
# =========================================================================

def homogeneous_l1_norms(s: PowerSeries) -> HomogeneousNorms:
    """‖a_k‖₁ = Σ_{|α|=k} |a_α| for k = 0..D."""
    if s.is_zero:
        return HomogeneousNorms((0.0,) * (s.truncation_degree + 1))
    values = np.bincount(s.degree_vector, weights=np.abs(s.coefficient_vector),
                         minlength=s.truncation_degree + 1)
    return HomogeneousNorms(tuple(float(v) for v in values))


def log_degree_terms(norms: HomogeneousNorms, r: float) -> np.ndarray:
    """log(‖a_k‖₁ r^k) for every degree k; −inf for empty degrees."""
    degrees = np.arange(len(norms), dtype=float)
    return norms.log_values + degrees * math.log(r)


def top_degree(log_terms: np.ndarray) -> int:
    """Largest degree whose term attains the maximum within the tie tolerance."""
    best = float(np.max(log_terms))
    tolerance = _TIE_TOLERANCE * max(1.0, abs(best))
    return int(np.flatnonzero(log_terms >= best - tolerance)[-1])


# =========================================================================
# TRUNCATION TRUST
# =========================================================================

def is_trusted(s: PowerSeries, r: float, policy: Optional[TrustPolicy] = None) -> bool:
    """
    A radius is trusted when ν̃(r) <= D − margin and the last ``margin``
    non-empty degree terms ‖a_k‖₁ r^k shrink by at least ``decay_ratio`` per step.
    """
    if s.exact or s.is_zero:
        return True
    policy = policy or TrustPolicy.from_settings()
    norms = homogeneous_l1_norms(s)
    log_terms = log_degree_terms(norms, r)
    degree = s.truncation_degree

    if top_degree(log_terms) > degree - policy.margin:
        return False

    tail = log_terms[max(0, degree - policy.margin + 1):]
    tail = tail[np.isfinite(tail)]
    if tail.size < 2:
        return True
    return bool(np.all(np.diff(tail) <= math.log(policy.decay_ratio) + _TIE_TOLERANCE))


def trust_flags(s: PowerSeries, radii: Iterable[float],
                policy: Optional[TrustPolicy] = None) -> Tuple[bool, ...]:
    return tuple(is_trusted(s, r, policy) for r in radii)


def require_trusted(s: PowerSeries, radii: Iterable[float],
                    policy: Optional[TrustPolicy] = None, acknowledge_untrusted: bool = False) -> None:
    """Raise UntrustedRadiusError unless every radius is trusted (or the caller overrides)."""
    if acknowledge_untrusted:
        return
    radii = list(radii)
    bad = [r for r, ok in zip(radii, trust_flags(s, radii, policy)) if not ok]
    if bad:
        raise UntrustedRadiusError(bad, f"truncation degree {s.truncation_degree}")


# =========================================================================
# EVALUATION
# =========================================================================

class EvaluationBatch(NamedTuple):
    """Values mantissa·exp(log_scale) at many points, with log Σ|a_α z^α|."""

    mantissas: np.ndarray
    log_scales: np.ndarray
    log_majorants: np.ndarray

    @property
    def log_abs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(self.mantissas)) + self.log_scales
        return np.where(self.mantissas == 0, LOG_ZERO, logs)

    @property
    def values(self) -> np.ndarray:
        """Plain complex values; overflow to inf where they do not fit a double."""
        with np.errstate(over="ignore", invalid="ignore"):
            values = self.mantissas * np.exp(self.log_scales)
        return np.where(self.mantissas == 0, 0j, values)

    def split(self, i: int) -> SplitComplex:
        if self.mantissas[i] == 0:
            return SplitComplex(0j, LOG_ZERO)
        return SplitComplex(complex(self.mantissas[i]), float(self.log_scales[i])).normalized()


def _as_points(s: PowerSeries, points) -> np.ndarray:
    array = np.asarray(points, dtype=complex)
    if array.ndim == 1:
        array = array[None, :]
    if array.ndim != 2 or array.shape[1] != s.dimension:
        raise DimensionMismatchError(
            f"Points must have {s.dimension} coordinates, got shape {array.shape}")
    return array


def _log_terms(s: PowerSeries, points: np.ndarray) -> np.ndarray:
    """Complex log of every term a_α z^α (terms × points); −inf real part for zeros."""
    exponents = s.exponent_matrix
    zero_coordinates = points == 0
    log_z = np.log(np.where(zero_coordinates, 1.0, points))
    terms = s.log_coefficient_vector[:, None] + exponents @ log_z.T
    if zero_coordinates.any():
        dead = (exponents > 0).astype(float) @ zero_coordinates.T.astype(float) > 0
        terms = np.where(dead, complex(LOG_ZERO, 0.0), terms)
    return terms


def evaluate_many(s: PowerSeries, points) -> EvaluationBatch:
    """Vectorised split-magnitude evaluation at each row of ``points``."""
    points = _as_points(s, points)
    count = points.shape[0]
    mantissas = np.zeros(count, dtype=complex)
    log_scales = np.full(count, LOG_ZERO)
    majorants = np.full(count, LOG_ZERO)
    if s.is_zero:
        return EvaluationBatch(mantissas, log_scales, majorants)

    chunk = max(1, _CHUNK_CELLS // max(1, len(s)))
    for start in range(0, count, chunk):
        block = slice(start, start + chunk)
        terms = _log_terms(s, points[block])
        shift = np.max(terms.real, axis=0)
        alive = np.isfinite(shift)
        safe_shift = np.where(alive, shift, 0.0)
        with np.errstate(invalid="ignore"):
            scaled = np.exp(terms - safe_shift[None, :])
        mantissas[block] = np.where(alive, scaled.sum(axis=0), 0j)
        log_scales[block] = np.where(alive, shift, LOG_ZERO)
        majorants[block] = logsumexp(terms.real, axis=0)
    return EvaluationBatch(mantissas, log_scales, majorants)


def evaluate_closed_form(s: PowerSeries, points) -> np.ndarray:
    """Complex log f at each row of ``points``, from the closed form the series carries."""
    if s.log_closed_form is None:
        raise ValueError("The series carries no closed form")
    return np.asarray(s.log_closed_form(_as_points(s, points)), dtype=complex)


def _value_function(s: PowerSeries) -> Optional[LogForm]:
    """z ↦ s(z) without truncation error: through a closed form, or term by term if exact."""
    if s.log_closed_form is not None:
        log_form = s.log_closed_form
        return lambda points: np.exp(log_form(points))
    if s.exact:
        return lambda points: evaluate_many(s, points).values
    return None


def evaluate(s: PowerSeries, z, scale_degree: Optional[int] = None) -> SplitComplex:
    """
    f(z) as mantissa·exp(log_scale).

    Terms are summed degree by degree with compensated (fsum) accumulation,
    relative to r^{scale_degree} (r = ‖z‖) when given, otherwise relative to
    the largest term. The requested scale is held within ``_SCALE_HEADROOM``
    of the largest term in log space, so that term neither overflows nor
    flushes to zero.
    """
    point = _as_points(s, z)
    if s.is_zero:
        return SplitComplex(0j, LOG_ZERO)

    terms = _log_terms(s, point)[:, 0]
    largest = float(np.max(terms.real))
    if not np.isfinite(largest):
        return SplitComplex(0j, LOG_ZERO)
    norm = float(np.linalg.norm(point[0]))
    shift = largest
    if scale_degree is not None and norm > 0:
        requested = scale_degree * math.log(norm)
        shift = min(max(requested, largest - _SCALE_HEADROOM), largest + _SCALE_HEADROOM)

    scaled = np.exp(terms - shift)
    real_parts, imag_parts = [], []
    for _, group in groupby(range(len(s)), key=lambda i: s.degree_vector[i]):
        members = list(group)
        real_parts.append(math.fsum(scaled.real[members]))
        imag_parts.append(math.fsum(scaled.imag[members]))
    total = complex(math.fsum(real_parts), math.fsum(imag_parts))

    if total == 0:
        return SplitComplex(0j, LOG_ZERO)
    return SplitComplex(total, shift).normalized()
