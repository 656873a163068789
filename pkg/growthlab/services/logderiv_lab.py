"""
Logarithmic partial-derivative ratios and the estimates built on them.

The sup of |∂^{I_n}f/∂^I f| over a sphere is approximated by the largest
value over σ-samples; points where ∂^I f nearly vanishes are redrawn. The
exceptional set of every estimate is reported as the violating grid radii
and their logarithmic measure. Radii whose sphere integrals drown in
rounding error are reported like untrusted ones.
"""

import logging
import math
from collections import Counter
from itertools import product
from statistics import median
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from growthlab.config.settings import settings
from growthlab.entities.growth import RadiusGrid, TrustPolicy
from growthlab.entities.multi_index import MultiIndex
from growthlab.entities.power_series import PowerSeries
from growthlab.entities.quotient import Quotient
from growthlab.entities.reports import IdentityCheck, InequalityRecord, InequalityReport
from growthlab.services.errors import (
    DegenerateSeriesError,
    DimensionMismatchError,
    InfiniteOrderError,
    PreconditionError,
    UnresolvedRadiusError,
    VanishingDenominatorError,
)
from growthlab.services.geometry_sampling import log_modulus, sample_until_usable, seeded_radii
from growthlab.services.growth_functionals import (
    ProfileOptions,
    build_profiles,
    counting_from_valence,
    order_estimate,
    proximity,
)
from growthlab.services.series_core import (
    evaluate,
    evaluate_many,
    is_trusted,
    partial_derivative,
)
from growthlab.utils.logmag import LOG_ZERO, SplitComplex, log_plus
from growthlab.workers.pool import WorkerPool

logger = logging.getLogger(__name__)

# Pointwise derivatives ∂^{axes} g at the rows of an array of points.
PointDerivatives = Callable[[Tuple[int, ...], np.ndarray], np.ndarray]

# Circle radius and node count of the trapezoidal Cauchy formula.
_CONTOUR_RADIUS = 1e-2
_CONTOUR_NODES = 16


def _check_indices(f: PowerSeries, *indices: MultiIndex) -> None:
    for index in indices:
        if index.dimension != f.dimension:
            raise DimensionMismatchError(
                f"Index {index} does not match dimension {f.dimension}")


def _derivative_pair(f: PowerSeries, I: MultiIndex, I_n: MultiIndex) -> Tuple[PowerSeries, PowerSeries]:
    """(∂^{I_n} f, ∂^I f) with the checks every ratio operation shares."""
    if f.is_zero:
        raise DegenerateSeriesError("Logarithmic derivatives of the zero series are undefined")
    _check_indices(f, I, I_n)
    denominator = partial_derivative(f, I)
    if denominator.is_zero:
        raise DegenerateSeriesError(f"∂^{I.exponents} f vanishes identically")
    return partial_derivative(f, I_n), denominator


def logderiv_ratio(f: PowerSeries, I: MultiIndex, I_n: MultiIndex, z) -> SplitComplex:
    """∂^{I_n}f(z) / ∂^I f(z) in split-magnitude form."""
    numerator, denominator = _derivative_pair(f, I, I_n)
    bottom = evaluate(denominator, z)
    if bottom.is_zero or bottom.log_abs < math.log(settings.denominator_floor):
        raise VanishingDenominatorError(f"∂^{I.exponents} f vanishes at {z}")
    return evaluate(numerator, z) / bottom


def _sampled_log_ratio_max(quotient: Quotient, r: float, count: int, seed: int) -> float:
    """max over σ-samples on S(r) of log|g/h|; vanishing denominators are redrawn."""

    def values_at(directions: np.ndarray):
        guarded = log_modulus(quotient, r * directions)
        usable = guarded.reliable & ~np.isnan(guarded.log_abs)
        return np.where(usable, guarded.log_abs, LOG_ZERO), usable

    values, usable = sample_until_usable(quotient.dimension, count, seed, values_at)
    if not usable.any():
        raise VanishingDenominatorError(f"Denominator vanishes at every sample on S({r})")
    return float(np.max(values[usable]))


def _untrusted(r: float) -> InequalityRecord:
    return InequalityRecord(r, math.nan, math.nan, False, trusted=False)


def _trusted_everywhere(radii: Sequence[float], series: Sequence[PowerSeries],
                        policy: Optional[TrustPolicy]) -> bool:
    return all(is_trusted(s, r, policy) for s in series for r in radii)


def _per_radius(record_at: Callable[[float, int], InequalityRecord], grid: RadiusGrid,
                seed: int, theorem: str) -> List[InequalityRecord]:
    """record_at over the grid, one spawned seed per radius; unresolved radii become untrusted."""

    def guarded(task: Tuple[float, int]) -> InequalityRecord:
        r, radius_seed = task
        try:
            return record_at(r, radius_seed)
        except UnresolvedRadiusError as e:
            logger.info("%s r=%.6g unresolved: %s", theorem, r, e)
            return _untrusted(r)

    return WorkerPool.map(guarded, seeded_radii(grid.radii, seed))


# =========================================================================
# DERIVATIVE RATIOS AGAINST THE CHARACTERISTIC
# =========================================================================

def _rate_against_running_median(records: List[InequalityRecord], factor: float) -> None:
    """Rewrite rhs/satisfied: a radius passes unless its ratio beats factor × running median."""
    seen: List[float] = []
    for record in records:
        if not record.trusted:
            continue
        ratio = record.lhs_log - record.core_log
        seen.append(ratio)
        record.rhs_log = math.log(factor) + median(seen) + record.core_log
        record.satisfied = record.lhs_log <= record.rhs_log + settings.inequality_slack


def verify_theorem21(f: PowerSeries, I: MultiIndex, I_n: MultiIndex, alpha: float,
                     grid: RadiusGrid, points_per_radius: Optional[int] = None, seed: int = 0,
                     count: Optional[int] = None,
                     policy: Optional[TrustPolicy] = None) -> InequalityReport:
    """
    |∂^{I_n}f/∂^I f| against (T(α²r,f)/r + n_{∂^I f}(α²r)/r)^n, n = |I_n| − |I|.

    The per-radius ratio LHS/core feeds the empirical constant B; a radius is
    flagged when its ratio exceeds the running median by ``exceptional_factor``.
    """
    if not alpha > 1:
        raise PreconditionError(f"α must exceed 1, got {alpha}")
    numerator, denominator = _derivative_pair(f, I, I_n)
    n = I_n.degree - I.degree
    if n < 1:
        raise PreconditionError(f"|I_n| must exceed |I|, got {I_n.degree} and {I.degree}")
    points_per_radius = points_per_radius or settings.points_per_radius
    window = settings.counting_window
    quotient = Quotient(numerator, denominator)

    def record_at(r: float, radius_seed: int) -> InequalityRecord:
        outer = alpha ** 2 * r
        if not (_trusted_everywhere([r], [numerator, denominator], policy)
                and _trusted_everywhere([outer, window * outer], [f, denominator], policy)):
            return _untrusted(r)
        lhs_log = _sampled_log_ratio_max(quotient, r, points_per_radius, radius_seed)
        T = proximity(f, outer, count, radius_seed, policy).value
        counted = counting_from_valence(denominator, outer, window * outer, count, radius_seed,
                                        policy)
        base = (T + max(0.0, counted.value)) / r
        core_log = n * math.log(base) if base > 0 else LOG_ZERO
        logger.debug("T21 r=%.6g lhs=%.6g core=%.6g", r, lhs_log, core_log)
        return InequalityRecord(r, lhs_log, math.nan, True, core_log=core_log)

    records = _per_radius(record_at, grid, seed, "T21")
    _rate_against_running_median(records, settings.exceptional_factor)
    ratios = [r.lhs_log - r.core_log for r in records if r.trusted]
    report = InequalityReport(
        theorem="T21", records=records,
        empirical_constant=math.exp(max(ratios)) if ratios else math.nan, seed=seed,
        parameters={"I": I.exponents, "I_n": I_n.exponents, "alpha": alpha,
                    "points_per_radius": points_per_radius})
    logger.info("T21: B=%.6g, %d violating radii", report.empirical_constant,
                len(report.violating_radii))
    return report


def constant_is_bounded(report: InequalityReport, factor: Optional[float] = None) -> bool:
    """Trailing-half max of LHS/core at most ``factor`` × trailing-half median (no blow-up)."""
    factor = factor or settings.exceptional_factor
    ratios = [r.lhs_log - r.core_log for r in report.checked if np.isfinite(r.core_log)]
    if not ratios:
        return False
    tail = ratios[len(ratios) // 2:]
    return max(tail) <= math.log(factor) + median(tail)


# =========================================================================
# POWER-OF-r BOUND FOR FINITE ORDER
# =========================================================================

def verify_corollary21(f: PowerSeries, I: MultiIndex, I_n: MultiIndex, epsilon: float,
                       grid: RadiusGrid, points_per_radius: Optional[int] = None, seed: int = 0,
                       order: Optional[float] = None, order_source: str = "max_term",
                       policy: Optional[TrustPolicy] = None) -> InequalityReport:
    """sup |∂^{I_n}f/∂^I f| on S(r) against r^{n(ρ̂−1+ε)} with ρ̂ estimated on the same grid."""
    if not epsilon > 0:
        raise PreconditionError(f"ε must be positive, got {epsilon}")
    numerator, denominator = _derivative_pair(f, I, I_n)
    n = I_n.degree - I.degree
    points_per_radius = points_per_radius or settings.points_per_radius

    if order is None:
        options = ProfileOptions(seed=seed, with_max_modulus=order_source == "max_modulus",
                                 with_integrals=False, policy=policy)
        order = order_estimate(build_profiles(f, grid.radii, options), order_source)
    if not order <= settings.max_finite_order:
        raise InfiniteOrderError(f"Order estimate {order:.3g} is not finite; refusing")

    exponent = n * (order - 1 + epsilon)
    quotient = Quotient(numerator, denominator)

    def record_at(r: float, radius_seed: int) -> InequalityRecord:
        if not _trusted_everywhere([r], [f, numerator, denominator], policy):
            return _untrusted(r)
        lhs_log = _sampled_log_ratio_max(quotient, r, points_per_radius, radius_seed)
        rhs_log = exponent * math.log(r)
        return InequalityRecord(r, lhs_log, rhs_log,
                                lhs_log <= rhs_log + settings.inequality_slack, core_log=rhs_log)

    records = _per_radius(record_at, grid, seed, "C21")
    excess = [r.lhs_log - r.rhs_log for r in records if r.trusted]
    report = InequalityReport(
        theorem="C21", records=records,
        empirical_constant=math.exp(max(excess)) if excess else math.nan, seed=seed,
        parameters={"I": I.exponents, "I_n": I_n.exponents, "epsilon": epsilon,
                    "order_estimate": order, "order_source": order_source})
    logger.info("C21: rho=%.4g, exceptional measure %.4g of %.4g", order,
                report.exceptional_measure, report.grid_log_length)
    return report


# =========================================================================
# ZERO COUNT OF A DERIVATIVE
# =========================================================================

def _log_or_zero(value: float) -> float:
    return math.log(value) if value > 0 else LOG_ZERO


def verify_lemma24(f: PowerSeries, I: MultiIndex, a: float = 0.0, alpha: float = 2.0,
                   grid: Optional[RadiusGrid] = None, seed: int = 0, count: Optional[int] = None,
                   policy: Optional[TrustPolicy] = None) -> InequalityReport:
    """
    n_{∂^I f}(r) for the value a against (|I|+3)/log α · T(αr,f).

    Each side is widened by 3·stderr and its rounding bias: lhs holds the
    smallest count and rhs the largest bound compatible with the samples,
    and ``satisfied`` is read off the margin between them.
    """
    if grid is None:
        raise PreconditionError("A radius grid is required")
    if not alpha > 1:
        raise PreconditionError(f"α must exceed 1, got {alpha}")
    if a not in (0.0, math.inf):
        raise PreconditionError(f"Only the values 0 and ∞ are supported, got {a}")
    if f.is_zero:
        raise DegenerateSeriesError("The zero series has no divisor")
    _check_indices(f, I)
    derived = partial_derivative(f, I)
    factor = (I.degree + 3) / math.log(alpha)
    window = settings.counting_window

    def record_at(r: float, radius_seed: int) -> InequalityRecord:
        if not (_trusted_everywhere([r, window * r], [derived], policy)
                and _trusted_everywhere([alpha * r], [f], policy)):
            return _untrusted(r)
        T = proximity(f, alpha * r, count, radius_seed, policy)
        if a == math.inf or derived.is_zero:
            # an entire function has no poles; ∂^I f ≡ 0 has no divisor to count
            counted_low = 0.0
        else:
            counted = counting_from_valence(derived, r, window * r, count, radius_seed, policy)
            counted_low = max(0.0, counted.value - 3 * counted.std_error - counted.bias_bound)
        bound_high = factor * (T.value + 3 * T.std_error + T.bias_bound)
        record = InequalityRecord(r, _log_or_zero(counted_low), _log_or_zero(bound_high), False,
                                  core_log=_log_or_zero(factor * T.value))
        record.satisfied = counted_low == 0 or record.margin >= -settings.inequality_slack
        return record

    records = _per_radius(record_at, grid, seed, "L24")
    report = InequalityReport(theorem="L24", records=records, seed=seed,
                              parameters={"I": I.exponents, "a": a, "alpha": alpha})
    report.threshold = report.pass_threshold()
    return report


# =========================================================================
# PROXIMITY OF THE LOGARITHMIC DERIVATIVE
# =========================================================================

def verify_logderiv_lemma(f: PowerSeries, I: MultiIndex, epsilon: float, grid: RadiusGrid,
                          count: Optional[int] = None, seed: int = 0,
                          policy: Optional[TrustPolicy] = None) -> InequalityReport:
    """
    m(r, ∂^I f/f) against |I| log⁺T(r,f) + |I|(1+ε) log⁺log T(r,f).

    Records hold proximities (not logs of them). The O(1) term is reported as
    the empirical constant; radii exceeding the running median of LHS − core
    by more than 1 are flagged.
    """
    if f.is_zero:
        raise DegenerateSeriesError("Logarithmic derivatives of the zero series are undefined")
    _check_indices(f, I)
    numerator = partial_derivative(f, I)
    quotient = Quotient(numerator, f)

    def record_at(r: float, radius_seed: int) -> InequalityRecord:
        if not _trusted_everywhere([r], [f, numerator], policy):
            return _untrusted(r)
        lhs = proximity(quotient, r, count, radius_seed, policy).value
        T = proximity(f, r, count, radius_seed, policy).value
        core = I.degree * log_plus(T) + I.degree * (1 + epsilon) * log_plus(log_plus(T))
        return InequalityRecord(r, lhs, math.nan, True, core_log=core)

    records = _per_radius(record_at, grid, seed, "L23")
    seen: List[float] = []
    for record in records:
        if not record.trusted:
            continue
        seen.append(record.lhs_log - record.core_log)
        record.rhs_log = record.core_log + median(seen) + 1.0
        record.satisfied = record.lhs_log <= record.rhs_log
    excess = [r.lhs_log - r.core_log for r in records if r.trusted]
    return InequalityReport(theorem="L23", records=records,
                            empirical_constant=max(excess) if excess else math.nan, seed=seed,
                            parameters={"I": I.exponents, "epsilon": epsilon},
                            notes=["lhs/rhs columns are proximities, not logarithms"])


# =========================================================================
# PRODUCT IDENTITIES
# =========================================================================

def series_derivatives(g: PowerSeries) -> PointDerivatives:
    """∂^{axes} g at points, from term-by-term differentiation of the series."""
    m = g.dimension
    derived: Dict[Tuple[int, ...], PowerSeries] = {}

    def at(axes: Tuple[int, ...], points: np.ndarray) -> np.ndarray:
        key = tuple(sorted(axes))
        if key not in derived:
            series = g
            for axis in key:
                series = partial_derivative(series, MultiIndex.unit(m, axis))
            derived[key] = series
        return evaluate_many(derived[key], points).values

    return at


def contour_derivative(function: Callable[[np.ndarray], np.ndarray], points: np.ndarray,
                       axes: Tuple[int, ...]) -> np.ndarray:
    """
    ∂^{axes} of an analytic ``function`` at each point by the trapezoidal
    Cauchy formula on a polydisc of radius ``_CONTOUR_RADIUS``.
    """
    count, m = points.shape
    orders = Counter(axes)
    active = sorted(orders)
    nodes = np.exp(2j * np.pi * np.arange(_CONTOUR_NODES) / _CONTOUR_NODES)
    grid = np.array(list(product(range(_CONTOUR_NODES), repeat=len(active))), dtype=int)

    offsets = np.zeros((len(grid), m), dtype=complex)
    weights = np.ones(len(grid), dtype=complex)
    factor = 1.0
    for column, axis in enumerate(active):
        roots = nodes[grid[:, column]]
        offsets[:, axis] = _CONTOUR_RADIUS * roots
        weights *= np.conj(roots) ** orders[axis]
        factor *= math.factorial(orders[axis]) / _CONTOUR_RADIUS ** orders[axis]

    shifted = (points[:, None, :] + offsets[None, :, :]).reshape(-1, m)
    values = np.asarray(function(shifted)).reshape(count, len(grid))
    return factor * (values @ weights) / len(grid)


def _relative_gap(lhs: np.ndarray, rhs: np.ndarray, scale_: np.ndarray) -> float:
    gap = np.abs(lhs - rhs)
    relative = np.where(scale_ > 0, gap / np.where(scale_ > 0, scale_, 1.0), gap)
    return float(np.max(relative)) if relative.size else 0.0


def verify_logderiv_identities(f: PowerSeries, points, tolerance: Optional[float] = None,
                               I: Optional[MultiIndex] = None,
                               derivatives: Optional[PointDerivatives] = None) -> IdentityCheck:
    """
    The quotient-rule expansions of ∂_j(∂_i g/g) and ∂_l∂_k(∂_i g/g), g = ∂^I f,
    for every ordered tuple (i, j) and (i, k, l).

    Left sides differentiate the pointwise ratio ∂_i g/g by the Cauchy
    formula; right sides combine the derivatives of g at the point, taken
    from ``derivatives`` (closed forms, say) or from the series.
    """
    tolerance = tolerance if tolerance is not None else settings.identity_tolerance
    m = f.dimension
    I = I or MultiIndex.zero(m)
    _check_indices(f, I)
    g = partial_derivative(f, I)
    if g.is_zero:
        raise DegenerateSeriesError("g = ∂^I f vanishes identically")
    derivative = derivatives or series_derivatives(g)

    points = np.asarray(points, dtype=complex).reshape(-1, m)
    g_values = derivative((), points)
    if np.any(np.abs(g_values) <= settings.denominator_floor):
        raise VanishingDenominatorError("g vanishes at a test point")

    def ratio(*axes: int) -> np.ndarray:
        return derivative(axes, points) / g_values

    def log_derivative(i: int) -> Callable[[np.ndarray], np.ndarray]:
        return lambda z: derivative((i,), z) / derivative((), z)

    first = 0.0
    for i, j in product(range(m), repeat=2):
        lhs = contour_derivative(log_derivative(i), points, (j,))
        rhs_terms = [ratio(i, j), -ratio(j) * ratio(i)]
        first = max(first, _relative_gap(lhs, sum(rhs_terms),
                                         sum(np.abs(t) for t in rhs_terms)))

    second = 0.0
    for i, k, l in product(range(m), repeat=3):
        lhs = contour_derivative(log_derivative(i), points, (k, l))
        rhs_terms = [ratio(i, k, l), -ratio(l) * ratio(i, k), -ratio(i) * ratio(k, l),
                     -ratio(k) * ratio(i, l), 2 * ratio(i) * ratio(k) * ratio(l)]
        second = max(second, _relative_gap(lhs, sum(rhs_terms),
                                           sum(np.abs(t) for t in rhs_terms)))

    logger.debug("identities: first %.3g second %.3g", first, second)
    return IdentityCheck(passed=max(first, second) <= tolerance,
                         max_discrepancy_first=first, max_discrepancy_second=second,
                         points_used=int(points.shape[0]), tolerance=tolerance)
