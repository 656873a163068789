"""
Comparison theorems between maximum term, central index and maximum modulus,
and the Wiman–Valiron ratio ∂^I f/f ≈ (ν̃(r)/L(z))^{|I|} at torus maxima.
"""

import logging
import math
from typing import List, Optional, Sequence, Union

import numpy as np

from growthlab.config.settings import settings
from growthlab.entities.growth import RadiusGrid, TrustPolicy
from growthlab.entities.multi_index import MultiIndex
from growthlab.entities.power_series import PowerSeries
from growthlab.entities.reports import (
    InequalityRecord,
    InequalityReport,
    OrderAgreement,
    WVRecord,
)
from growthlab.services.errors import (
    DimensionMismatchError,
    PreconditionError,
    UnresolvedRadiusError,
)
from growthlab.services.geometry_sampling import (
    max_modulus_sphere,
    max_modulus_torus,
    seeded_radii,
)
from growthlab.services.growth_functionals import (
    ProfileOptions,
    build_profiles,
    central_index,
    max_term,
    order_estimate,
    proximity,
)
from growthlab.services.series_core import (
    evaluate,
    homogeneous_l1_norms,
    is_trusted,
    partial_derivative,
)
from growthlab.workers.pool import WorkerPool

logger = logging.getLogger(__name__)


def _untrusted(r: float) -> InequalityRecord:
    return InequalityRecord(r, math.nan, math.nan, False, trusted=False)


# =========================================================================
# MAXIMUM TERM VERSUS MAXIMUM MODULUS
# =========================================================================

def verify_t31(f: PowerSeries, grid: RadiusGrid, restarts: Optional[int] = None, seed: int = 0,
               policy: Optional[TrustPolicy] = None) -> InequalityReport:
    """log μ̃(r) ≤ m·log M(√m r) per radius, with the threshold R* above which all pass."""
    m = f.dimension
    norms = homogeneous_l1_norms(f)

    def record_at(r: float, radius_seed: int) -> InequalityRecord:
        outer = math.sqrt(m) * r
        if not (is_trusted(f, r, policy) and is_trusted(f, outer, policy)):
            return _untrusted(r)
        lhs = max_term(norms, r)
        log_M, _ = max_modulus_sphere(f, outer, restarts, radius_seed, policy)
        rhs = m * log_M
        return InequalityRecord(r, lhs, rhs, lhs <= rhs + settings.inequality_slack)

    records = WorkerPool.map(lambda task: record_at(*task), seeded_radii(grid.radii, seed))
    report = InequalityReport(theorem="T31", records=records, seed=seed,
                              parameters={"restarts": restarts or settings.sphere_restarts})
    report.threshold = report.pass_threshold()
    logger.info("T31: threshold R*=%s", report.threshold)
    return report


def verify_t32(f: PowerSeries, grid: RadiusGrid, restarts: Optional[int] = None, seed: int = 0,
               R_factor: float = 2.0, policy: Optional[TrustPolicy] = None) -> InequalityReport:
    """log M(r) ≤ log μ̃(r) + log(ν̃(R) + R/(R−r)) with R = R_factor·r."""
    if not R_factor > 1:
        raise PreconditionError(f"R must exceed r, got factor {R_factor}")
    norms = homogeneous_l1_norms(f)

    def record_at(r: float, radius_seed: int) -> InequalityRecord:
        R = R_factor * r
        if not (is_trusted(f, r, policy) and is_trusted(f, R, policy)):
            return _untrusted(r)
        lhs, _ = max_modulus_sphere(f, r, restarts, radius_seed, policy)
        rhs = max_term(norms, r) + math.log(central_index(norms, R) + R / (R - r))
        return InequalityRecord(r, lhs, rhs, lhs <= rhs + settings.inequality_slack)

    records = WorkerPool.map(lambda task: record_at(*task), seeded_radii(grid.radii, seed))
    report = InequalityReport(
        theorem="T32", records=records, seed=seed,
        parameters={"R_factor": R_factor, "restarts": restarts or settings.sphere_restarts},
        notes=["log M(r) is the best value found by search, a lower bound for the true "
               "maximum; a PASS holds only as far as the search reached the maximum"])
    report.threshold = report.pass_threshold()
    return report


def verify_t33(f: PowerSeries, grid: RadiusGrid, restarts: Optional[int] = None,
               seed: int = 0, policy: Optional[TrustPolicy] = None) -> OrderAgreement:
    """Order estimated through M, μ̃ and ν̃ on the same profiles."""
    options = ProfileOptions(seed=seed, restarts=restarts, with_integrals=False, policy=policy)
    profiles = build_profiles(f, grid.radii, options)
    agreement = OrderAgreement(
        via_max_modulus=order_estimate(profiles, "max_modulus"),
        via_max_term=order_estimate(profiles, "max_term"),
        via_central_index=order_estimate(profiles, "central_index"),
    )
    logger.info("T33: orders %s", agreement.estimates)
    return agreement


def verify_cauchy_torus(f: PowerSeries, grid: RadiusGrid, restarts: Optional[int] = None,
                        seed: int = 0, policy: Optional[TrustPolicy] = None) -> InequalityReport:
    """Cauchy's inequality on the torus: max_α |a_α| r^{|α|} ≤ max_{|z_j|=r} |f|."""
    if f.is_zero:
        return InequalityReport(theorem="CAUCHY", seed=seed)
    log_coefficients = np.log(np.abs(f.coefficient_vector))

    def record_at(r: float, radius_seed: int) -> InequalityRecord:
        if not is_trusted(f, r, policy):
            return _untrusted(r)
        lhs = float(np.max(log_coefficients + f.degree_vector * math.log(r)))
        rhs, _ = max_modulus_torus(f, r, restarts, radius_seed, policy)
        return InequalityRecord(r, lhs, rhs, lhs <= rhs + settings.inequality_slack)

    records = WorkerPool.map(lambda task: record_at(*task), seeded_radii(grid.radii, seed))
    return InequalityReport(theorem="CAUCHY", records=records, seed=seed)


def verify_lemma32(f: PowerSeries, grid: RadiusGrid, count: Optional[int] = None, seed: int = 0,
                   restarts: Optional[int] = None,
                   policy: Optional[TrustPolicy] = None) -> InequalityReport:
    """
    T(r,f) ≤ log⁺M(r,f) ≤ (1 − (r/R)²)/(1 − r/R)^{2m} · T(R,f) with R = 2r.

    Records hold log⁺M(r) as lhs, the right bound as rhs and T(r) as core;
    both inequalities get 3·stderr slack on the proximities.
    """
    m = f.dimension
    factor = (1 - 0.25) / 0.5 ** (2 * m)

    def record_at(r: float, radius_seed: int) -> InequalityRecord:
        R = 2 * r
        if not (is_trusted(f, r, policy) and is_trusted(f, R, policy)):
            return _untrusted(r)
        log_M, _ = max_modulus_sphere(f, r, restarts, radius_seed, policy)
        log_plus_M = max(0.0, log_M)
        try:
            inner = proximity(f, r, count, radius_seed, policy)
            outer = proximity(f, R, count, radius_seed, policy)
        except UnresolvedRadiusError as e:
            logger.info("L32 r=%.6g unresolved: %s", r, e)
            return _untrusted(r)
        lower_ok = inner.value - 3 * inner.std_error <= log_plus_M + settings.inequality_slack
        upper_ok = log_plus_M <= factor * (outer.value + 3 * outer.std_error) + settings.inequality_slack
        return InequalityRecord(r, log_plus_M, factor * outer.value, lower_ok and upper_ok,
                                core_log=inner.value)

    records = WorkerPool.map(lambda task: record_at(*task), seeded_radii(grid.radii, seed))
    return InequalityReport(theorem="L32", records=records, seed=seed,
                            parameters={"factor": factor},
                            notes=["lhs is log+ M(r), rhs the bound on it, core T(r,f)"])


# =========================================================================
# WIMAN–VALIRON RATIO
# =========================================================================

def wv_ratio_check(f: PowerSeries, I: MultiIndex, a: Sequence[complex], grid: RadiusGrid,
                   delta: Optional[float] = None, restarts: Optional[int] = None, seed: int = 0,
                   policy: Optional[TrustPolicy] = None) -> List[WVRecord]:
    """
    η(r) = |(∂^I f/f)(z_r)·(L(z_r)/ν̃(r))^{|I|} − 1| at the torus argmax z_r.

    condition_ok records whether |f(z_r)| > M(√m r)·ν̃(r)^{−1/4+δ}; records with
    L(z_r) = 0 are invalid.
    """
    delta = settings.wv_delta if delta is None else delta
    m = f.dimension
    a = np.asarray(a, dtype=complex)
    if a.shape != (m,) or I.dimension != m:
        raise DimensionMismatchError(f"Linear form and index must have {m} entries")
    if np.any(a == 0):
        raise PreconditionError(f"Every coefficient of L must be non-zero, got {a}")
    if not 0 < delta < 0.25:
        raise PreconditionError(f"δ must lie in (0, 1/4), got {delta}")

    derived = partial_derivative(f, I)
    norms = homogeneous_l1_norms(f)

    def record_at(r: float, radius_seed: int) -> WVRecord:
        outer = math.sqrt(m) * r
        nu = central_index(norms, r)
        if not all(is_trusted(s, x, policy) for s, x in ((f, r), (derived, r), (f, outer))):
            return WVRecord(r, (), False, math.nan, math.nan, math.nan, nu, delta,
                            valid=False, trusted=False)

        log_f, torus_point = max_modulus_torus(f, r, restarts, radius_seed, policy)
        log_M, _ = max_modulus_sphere(f, outer, restarts, radius_seed, policy)
        condition_ok = nu > 0 and log_f > log_M + (delta - 0.25) * math.log(nu)

        z = torus_point.point
        L = complex(np.dot(a, z))
        if abs(L) == 0 or nu == 0:
            return WVRecord(r, torus_point.phases, condition_ok, math.nan, log_f, log_M, nu,
                            delta, valid=False)
        ratio = (evaluate(derived, z) / evaluate(f, z)).to_complex()
        eta = abs(ratio * (L / nu) ** I.degree - 1)
        logger.debug("WV r=%.6g nu=%d eta=%.3g ok=%s", r, nu, eta, condition_ok)
        return WVRecord(r, torus_point.phases, condition_ok, float(eta), log_f, log_M, nu, delta)

    return WorkerPool.map(lambda task: record_at(*task), seeded_radii(grid.radii, seed))


def exceptional_set_estimate(records: Union[InequalityReport, Sequence[WVRecord]],
                             threshold: Optional[float] = None) -> float:
    """Σ log(r_{k+1}/r_k) over grid intervals whose left endpoint violates."""
    if isinstance(records, InequalityReport):
        return records.exceptional_measure
    threshold = settings.eta_threshold if threshold is None else threshold
    ordered = sorted(records, key=lambda record: record.radius)
    return sum(math.log(right.radius / left.radius)
               for left, right in zip(ordered, ordered[1:]) if left.violates(threshold))


def eta_decay(records: Sequence[WVRecord]) -> tuple:
    """(mean η over the top decile, mean η over the bottom decile) of usable radii."""
    usable = sorted((r for r in records if r.trusted and r.valid and r.condition_ok),
                    key=lambda record: record.radius)
    if not usable:
        return math.nan, math.nan
    decile = max(1, len(usable) // 10)
    top = float(np.mean([r.eta for r in usable[-decile:]]))
    bottom = float(np.mean([r.eta for r in usable[:decile]]))
    return top, bottom


def fitted_decay_constant(records: Sequence[WVRecord]) -> float:
    """Smallest C with η(r) ≤ C/r on every usable radius."""
    usable = [r for r in records if r.trusted and r.valid and r.condition_ok]
    return max((r.eta * r.radius for r in usable), default=math.nan)
