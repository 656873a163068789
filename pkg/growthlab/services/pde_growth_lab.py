"""
Series solutions of ∂^I f − e^P f = Q with I = (k, 0, …, 0).

For k = 1 the solution is built stratum by stratum in z₁: writing
f = Σ_k f_k(z₂, …, z_m) z₁^k, the equation becomes
(k+1)·f_{k+1} = [e^P f + Q]_k. Higher k are handled through tautological
instances, where f is chosen first and Q is defined from it.
"""

import logging
import math
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from growthlab.config.settings import settings
from growthlab.entities.growth import GrowthProfile, RadiusGrid, TrustPolicy
from growthlab.entities.multi_index import MultiIndex
from growthlab.entities.pde import PdeInstance
from growthlab.entities.power_series import PowerSeries
from growthlab.entities.reports import HyperOrderVerdict, SmallnessCheck
from growthlab.services.errors import (
    NumericPreconditionError,
    PreconditionError,
    UnresolvedRadiusError,
)
from growthlab.services.geometry_sampling import sample_sigma, seeded_radii
from growthlab.services.growth_functionals import (
    ProfileOptions,
    build_profiles,
    hyper_order_estimate,
    proximity,
)
from growthlab.services.series_core import (
    antiderivative_z1,
    evaluate_many,
    exp_series,
    mul,
    partial_derivative,
    require_trusted,
    scale,
    subtract,
    truncate,
)
from growthlab.utils.logmag import SplitComplex, split_sum
from growthlab.workers.pool import WorkerPool

logger = logging.getLogger(__name__)

Stratum = Dict[Tuple[int, ...], complex]


def _exp_of_P(instance: PdeInstance) -> PowerSeries:
    return exp_series(truncate(instance.P, instance.truncation_degree))


def _strata(series: PowerSeries) -> Dict[int, Stratum]:
    """Coefficients grouped by the power of z₁, keyed by the exponents of z₂..z_m."""
    grouped: Dict[int, Stratum] = defaultdict(dict)
    for index, value in series.terms():
        grouped[index.exponents[0]][index.exponents[1:]] = value
    return grouped


def _degree(exponents: Tuple[int, ...]) -> int:
    return sum(exponents)


def solve_first_order(instance: PdeInstance) -> PowerSeries:
    """Truncated solution of ∂_{z₁} f − e^P f = Q with f(0, z₂, …) = f₀ (default 1)."""
    if instance.order != 1:
        raise PreconditionError(
            f"Only first-order instances are solved, got I = {instance.index}; "
            "use tautological_instance for higher orders")
    m, D = instance.dimension, instance.truncation_degree
    if D < instance.degree_P + 2:
        raise PreconditionError(f"Truncation degree {D} must be >= deg P + 2 = {instance.degree_P + 2}")

    initial = instance.initial_stratum or PowerSeries.constant(m, 1.0)
    if any(index.exponents[0] for index, _ in initial.terms()):
        raise PreconditionError("The initial stratum must not depend on z₁")
    if initial.is_zero:
        raise PreconditionError("The initial stratum must be non-zero")

    e_strata = _strata(_exp_of_P(instance))
    q_strata = _strata(instance.Q)
    f_strata: List[Stratum] = [
        {index.exponents[1:]: value for index, value in initial.terms() if index.degree <= D}]

    for k in range(D):
        budget = D - k - 1
        stratum: Stratum = defaultdict(complex)
        for j in range(k + 1):
            e_part = e_strata.get(j)
            if not e_part:
                continue
            for e_exponents, e_value in e_part.items():
                if _degree(e_exponents) > budget:
                    continue
                for f_exponents, f_value in f_strata[k - j].items():
                    key = tuple(a + b for a, b in zip(e_exponents, f_exponents))
                    if _degree(key) <= budget:
                        stratum[key] += e_value * f_value
        for q_exponents, q_value in q_strata.get(k, {}).items():
            if _degree(q_exponents) <= budget:
                stratum[q_exponents] += q_value
        f_strata.append({key: value / (k + 1) for key, value in stratum.items() if value != 0})

    coefficients = {MultiIndex((k,) + exponents): value
                    for k, stratum in enumerate(f_strata) for exponents, value in stratum.items()}
    logger.debug("solve_first_order: %d terms through degree %d", len(coefficients), D)
    return PowerSeries(m, coefficients, D)


def closed_form_solution(instance: PdeInstance, initial_value: complex = 1.0) -> PowerSeries:
    """c·exp(∫₀^{z₁} e^{P}) for Q ≡ 0 and P depending on z₁ only."""
    if not instance.Q.is_zero:
        raise PreconditionError("The closed form needs Q ≡ 0")
    if any(any(index.exponents[1:]) for index, _ in instance.P.terms()):
        raise PreconditionError("The closed form needs P = P(z₁)")
    if instance.order != 1:
        raise PreconditionError("The closed form solves first-order instances only")
    D = instance.truncation_degree
    exponent = truncate(antiderivative_z1(_exp_of_P(instance)), D)
    return scale(exp_series(exponent), initial_value)


def tautological_instance(f: PowerSeries, P: PowerSeries, I: MultiIndex) -> PdeInstance:
    """Instance with Q := ∂^I f − e^P f, so that f solves it by construction."""
    E = exp_series(truncate(P, f.truncation_degree))
    Q = subtract(partial_derivative(f, I), mul(E, f))
    return PdeInstance(f.dimension, I, P, Q, f.truncation_degree)


# =========================================================================
# CHECKS
# =========================================================================

def _negated(value: SplitComplex) -> SplitComplex:
    return SplitComplex(-value.mantissa, value.log_scale)


def residual(instance: PdeInstance, f: PowerSeries, points,
             policy: Optional[TrustPolicy] = None, acknowledge_untrusted: bool = False) -> float:
    """max over points of |∂^I f − e^P f − Q| / (1 + |e^P f|)."""
    points = np.asarray(points, dtype=complex).reshape(-1, instance.dimension)
    E = _exp_of_P(instance)
    derived = partial_derivative(f, instance.index)
    radius = float(np.max(np.linalg.norm(points, axis=1)))
    for series in (f, E, derived, instance.Q):
        require_trusted(series, [radius], policy, acknowledge_untrusted)

    d_batch, e_batch = evaluate_many(derived, points), evaluate_many(E, points)
    f_batch, q_batch = evaluate_many(f, points), evaluate_many(instance.Q, points)
    worst = 0.0
    for i in range(points.shape[0]):
        forced = e_batch.split(i) * f_batch.split(i)
        gap = split_sum(d_batch.split(i), _negated(forced), _negated(q_batch.split(i)))
        if gap.is_zero:
            continue
        log_scale = np.logaddexp(0.0, forced.log_abs)
        worst = max(worst, math.exp(gap.log_abs - log_scale))
    return worst


def smallness_check(f: PowerSeries, Q: PowerSeries, grid: RadiusGrid, seed: int = 0,
                    count: Optional[int] = None,
                    policy: Optional[TrustPolicy] = None) -> SmallnessCheck:
    """
    T(r,Q)/T(r,f) per radius; Q ≡ 0 gives zeros without sampling.

    A radius whose proximities are unresolved gets a NaN ratio.
    """
    radii = grid.radii
    if Q.is_zero:
        return SmallnessCheck(radii, tuple(0.0 for _ in radii))

    def ratio_at(task: Tuple[float, int]) -> float:
        r, radius_seed = task
        try:
            small = proximity(Q, r, count, radius_seed, policy).value
            if small == 0:
                return 0.0
            large = proximity(f, r, count, radius_seed, policy).value
        except UnresolvedRadiusError as e:
            logger.info("smallness r=%.6g unresolved: %s", r, e)
            return math.nan
        return small / large if large > 0 else math.inf

    return SmallnessCheck(radii, tuple(WorkerPool.map(ratio_at, seeded_radii(radii, seed))))


def proof_chain_bounds(instance: PdeInstance,
                       profiles: Sequence[GrowthProfile]) -> Tuple[bool, bool]:
    """
    Boundedness of log log ν̃ − n log r (below) and log log ν̃ − n log r − log log r
    (above) across the trusted profiles, n = deg P.

    "Bounded" means the trailing half of the grid drifts at most 0.5 past the
    leading half: min for the lower chain, max for the upper chain.
    """
    n = instance.degree_P
    usable = sorted((p for p in profiles if p.trusted and p.central_index > 1 and p.radius > 1),
                    key=lambda p: p.radius)
    if len(usable) < 4:
        return False, False

    log_log_nu = np.log(np.log([p.central_index for p in usable]))
    log_r = np.log([p.radius for p in usable])
    lower = log_log_nu - n * log_r
    upper = lower - np.log(log_r)

    half = len(usable) // 2
    lower_bounded = bool(np.min(lower[half:]) >= np.min(lower[:half]) - 0.5)
    upper_bounded = bool(np.max(upper[half:]) <= np.max(upper[:half]) + 0.5)
    return lower_bounded, upper_bounded


def verify_t41(instance: PdeInstance, f: PowerSeries, grid: RadiusGrid, seed: int = 0,
               residual_points: int = 64, tolerance: Optional[float] = None,
               count: Optional[int] = None,
               policy: Optional[TrustPolicy] = None) -> HyperOrderVerdict:
    """Hyper-order of f through ν̃ against deg P, after the residual and smallness gates."""
    tolerance = settings.hyper_order_tolerance if tolerance is None else tolerance
    points = sample_sigma(instance.dimension, 1.0, residual_points, seed).points
    gap = residual(instance, f, points, policy)
    if gap > settings.identity_tolerance:
        raise NumericPreconditionError(f"f does not solve the instance: residual {gap:.3g}")

    if not instance.Q.is_zero and not smallness_check(f, instance.Q, grid, seed, count, policy).small:
        raise NumericPreconditionError("Q is not small with respect to f on this grid")

    profiles = build_profiles(f, grid.radii, ProfileOptions.norms_only(policy))
    estimate = hyper_order_estimate(profiles, "central_index")
    lower, upper = proof_chain_bounds(instance, profiles)
    verdict = HyperOrderVerdict(estimate=estimate, expected=instance.degree_P, tolerance=tolerance,
                                lower_chain_bounded=lower, upper_chain_bounded=upper,
                                residual=gap)
    logger.info("T41: rho1=%.4g expected %d passed=%s", estimate, instance.degree_P, verdict.passed)
    return verdict
