"""
Growth functionals of entire functions on C^m.

Maximum term and central index come straight from the homogeneous ℓ¹ norms.
Proximity, sphere log-integrals and valences are Monte-Carlo integrals over
σ. Valence differences reuse one set of σ directions at both radii, so the
difference is estimated sample by sample. Order and hyper-order are the
largest least-squares slope over short windows in the trailing half of a
profile.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from growthlab.config.settings import settings
from growthlab.entities.growth import GrowthProfile, MonteCarloEstimate, TrustPolicy
from growthlab.entities.power_series import HomogeneousNorms, PowerSeries
from growthlab.entities.quotient import Quotient
from growthlab.services.errors import (
    DegenerateSeriesError,
    InsufficientDataError,
    PreconditionError,
    UnresolvedRadiusError,
    VanishingDenominatorError,
)
from growthlab.services.geometry_sampling import (
    Evaluable,
    GuardedLogModulus,
    log_modulus,
    max_modulus_sphere,
    max_modulus_torus,
    sample_sigma,
    seeded_radii,
)
from growthlab.services.series_core import (
    homogeneous_l1_norms,
    is_trusted,
    log_degree_terms,
    require_trusted,
    top_degree,
)
from growthlab.utils.logmag import LOG_ZERO, log_plus
from growthlab.workers.pool import WorkerPool

logger = logging.getLogger(__name__)

ORDER_SOURCES = ("max_term", "central_index", "max_modulus")


# =========================================================================
# MAXIMUM TERM AND CENTRAL INDEX
# =========================================================================

def max_term(norms: HomogeneousNorms, r: float) -> float:
    """log μ̃(r) = max_k (log ‖a_k‖₁ + k log r); −∞ for the zero series."""
    if not r > 0:
        raise ValueError(f"Radius must be positive, got {r}")
    if norms.is_zero:
        return LOG_ZERO
    return float(np.max(log_degree_terms(norms, r)))


def central_index(norms: HomogeneousNorms, r: float) -> int:
    """ν̃(r): the largest degree attaining the maximum term."""
    if not r > 0:
        raise ValueError(f"Radius must be positive, got {r}")
    if norms.is_zero:
        raise DegenerateSeriesError("The central index of the zero series is undefined")
    return top_degree(log_degree_terms(norms, r))


# =========================================================================
# MONTE-CARLO INTEGRALS OVER σ
# =========================================================================

def _directions(m: int, count: int, seed: int) -> np.ndarray:
    return sample_sigma(m, 1.0, count, seed).points


def _sphere_average(brackets: GuardedLogModulus, r: float, what: str,
                    keep: Optional[np.ndarray] = None) -> MonteCarloEstimate:
    """
    Mean of the bracket midpoints over every σ-sample drawn.

    Samples outside ``keep`` are rejected and counted, never replaced. An
    unbounded bracket, or a mean half-width above ``resolution_tolerance``,
    makes the radius unresolved.
    """
    count = len(brackets.log_abs)
    keep = np.ones(count, dtype=bool) if keep is None else keep
    lower, upper = brackets.lower[keep], brackets.upper[keep]
    if lower.size == 0:
        raise VanishingDenominatorError(f"{what}: every one of {count} σ-samples was rejected")

    unbounded = int(np.count_nonzero(~(np.isfinite(lower) & np.isfinite(upper))))
    if unbounded:
        raise UnresolvedRadiusError(
            [r], f"{what}: rounding error swamps {unbounded} of {count} samples")
    values = 0.5 * (lower + upper)
    bias = float(np.mean(0.5 * (upper - lower)))
    if bias > settings.resolution_tolerance:
        raise UnresolvedRadiusError([r], f"{what}: rounding can shift the mean by {bias:.3g}")

    std_error = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return MonteCarloEstimate(float(np.mean(values)), std_error, rejected=count - int(values.size),
                              count=count, bias_bound=bias)


def _require_evaluable(f: Evaluable, radii: Sequence[float], policy: Optional[TrustPolicy],
                       acknowledge_untrusted: bool) -> None:
    if isinstance(f, Quotient):
        require_trusted(f.numerator, radii, policy, acknowledge_untrusted)
        require_trusted(f.denominator, radii, policy, acknowledge_untrusted)
    else:
        require_trusted(f, radii, policy, acknowledge_untrusted)


def proximity(f: Evaluable, r: float, count: Optional[int] = None, seed: int = 0,
              policy: Optional[TrustPolicy] = None,
              acknowledge_untrusted: bool = False) -> MonteCarloEstimate:
    """
    m(r,f) = ∫_{S(r)} log⁺|f| σ.

    Where |f| is lost in rounding, log⁺|f| is still bracketed by
    [0, log⁺(computed + error)], so small majorants settle to 0.
    """
    count = count or settings.proximity_samples
    _require_evaluable(f, [r], policy, acknowledge_untrusted)
    points = r * _directions(f.dimension, count, seed)
    return _sphere_average(log_modulus(f, points).clipped(), r, "proximity")


def _underflow_mask(*sides: GuardedLogModulus) -> np.ndarray:
    keep = np.ones(len(sides[0].log_abs), dtype=bool)
    for side in sides:
        keep &= side.upper >= settings.underflow_log_floor
    return keep


def sphere_log_integral(f: Evaluable, r: float, count: Optional[int] = None, seed: int = 0,
                        policy: Optional[TrustPolicy] = None,
                        acknowledge_untrusted: bool = False) -> MonteCarloEstimate:
    """∫_{S(r)} log|f| σ; samples with log|f| below the underflow floor are rejected."""
    count = count or settings.proximity_samples
    _require_evaluable(f, [r], policy, acknowledge_untrusted)
    guarded = log_modulus(f, r * _directions(f.dimension, count, seed))
    estimate = _sphere_average(guarded, r, "sphere log-integral", _underflow_mask(guarded))
    if estimate.rejected:
        logger.info("sphere_log_integral r=%.6g rejected %d of %d samples",
                    r, estimate.rejected, count)
    return estimate


def _paired_log_difference(f: PowerSeries, outer: float, inner: float, count: int,
                           seed: int) -> MonteCarloEstimate:
    """Mean of log|f(outer·u)| − log|f(inner·u)| over shared σ-directions u."""
    directions = _directions(f.dimension, count, seed)
    high = log_modulus(f, outer * directions)
    low = log_modulus(f, inner * directions)
    with np.errstate(invalid="ignore"):
        difference = GuardedLogModulus(high.log_abs - low.log_abs,
                                       high.lower - low.upper, high.upper - low.lower)
    return _sphere_average(difference, outer, "valence", _underflow_mask(high, low))


def valence_jensen(f: PowerSeries, r: float, r0: Optional[float] = None,
                   count: Optional[int] = None, seed: int = 0,
                   policy: Optional[TrustPolicy] = None,
                   acknowledge_untrusted: bool = False) -> MonteCarloEstimate:
    """N(r, r₀; 0; f) = ∫_{S(r)} log|f| σ − ∫_{S(r₀)} log|f| σ for entire f."""
    r0 = r0 if r0 is not None else settings.jensen_base_radius
    count = count or settings.proximity_samples
    if not 1 < r0 < r:
        raise PreconditionError(f"Valence needs 1 < r0 < r, got r0={r0}, r={r}")
    if f.is_zero:
        raise DegenerateSeriesError("The valence of the zero series is undefined")
    require_trusted(f, [r0, r], policy, acknowledge_untrusted)
    if f.is_constant:
        return MonteCarloEstimate(0.0, 0.0, 0, count)
    return _paired_log_difference(f, r, r0, count, seed)


def counting_from_valence(f: PowerSeries, t1: float, t2: float, count: Optional[int] = None,
                          seed: int = 0, policy: Optional[TrustPolicy] = None,
                          acknowledge_untrusted: bool = False) -> MonteCarloEstimate:
    """
    Mean of n(t) over [t1, t2] on the log scale: (N(t2) − N(t1)) / log(t2/t1).

    The r₀ terms of the two valences cancel, so the difference is sampled directly.
    """
    count = count or settings.proximity_samples
    if not 1 < t1 < t2:
        raise PreconditionError(f"Counting window needs 1 < t1 < t2, got t1={t1}, t2={t2}")
    if f.is_zero:
        raise DegenerateSeriesError("The zero series has no divisor")
    require_trusted(f, [t1, t2], policy, acknowledge_untrusted)
    if f.is_constant:
        return MonteCarloEstimate(0.0, 0.0, 0, count)

    width = math.log(t2 / t1)
    difference = _paired_log_difference(f, t2, t1, count, seed)
    return MonteCarloEstimate(difference.value / width, difference.std_error / width,
                              difference.rejected, difference.count,
                              difference.bias_bound / width)


def characteristic(f: Evaluable, r: float, count: Optional[int] = None, seed: int = 0,
                   r0: Optional[float] = None, policy: Optional[TrustPolicy] = None,
                   acknowledge_untrusted: bool = False) -> MonteCarloEstimate:
    """T(r,f): m(r,f) for entire f; m(r,g/h) + N(r,r₀;0;h) for a quotient."""
    near = proximity(f, r, count, seed, policy, acknowledge_untrusted)
    if not isinstance(f, Quotient):
        return near
    poles = valence_jensen(f.denominator, r, r0, count, seed, policy, acknowledge_untrusted)
    return MonteCarloEstimate(near.value + poles.value,
                              math.hypot(near.std_error, poles.std_error),
                              near.rejected + poles.rejected, near.count,
                              near.bias_bound + poles.bias_bound)


# =========================================================================
# PROFILES
# =========================================================================

@dataclass(frozen=True)
class ProfileOptions:
    """Which quantities a profile computes beyond μ̃ and ν̃."""

    seed: int = 0
    count: Optional[int] = None
    restarts: Optional[int] = None
    with_max_modulus: bool = True
    with_torus: bool = False
    with_integrals: bool = True
    policy: Optional[TrustPolicy] = None

    @classmethod
    def norms_only(cls, policy: Optional[TrustPolicy] = None) -> "ProfileOptions":
        return cls(with_max_modulus=False, with_torus=False, with_integrals=False, policy=policy)


def _profile_at(f: PowerSeries, norms: HomogeneousNorms, r: float, seed: int,
                options: ProfileOptions) -> GrowthProfile:
    trusted = is_trusted(f, r, options.policy)
    profile = GrowthProfile(radius=float(r), log_max_term=max_term(norms, r),
                            central_index=central_index(norms, r), trusted=trusted, seed=seed)
    if not trusted:
        logger.debug("radius %.6g untrusted at truncation degree %d", r, f.truncation_degree)
        return profile

    if options.with_max_modulus:
        profile.log_M_sphere, _ = max_modulus_sphere(f, r, options.restarts, seed, options.policy)
    if options.with_torus:
        profile.log_M_torus, _ = max_modulus_torus(f, r, options.restarts, seed, options.policy)
    if options.with_integrals:
        try:
            near = proximity(f, r, options.count, seed, options.policy)
            profile.proximity, profile.proximity_stderr = near.value, near.std_error
            r0 = settings.jensen_base_radius
            if r > r0 and is_trusted(f, r0, options.policy):
                valence = valence_jensen(f, r, r0, options.count, seed, options.policy)
                profile.valence, profile.valence_stderr = valence.value, valence.std_error
        except UnresolvedRadiusError as e:
            logger.info("profile r=%.6g: %s", r, e)
    return profile


def build_profile(f: PowerSeries, r: float,
                  options: Optional[ProfileOptions] = None) -> GrowthProfile:
    options = options or ProfileOptions()
    return _profile_at(f, homogeneous_l1_norms(f), r, options.seed, options)


def build_profiles(f: PowerSeries, radii: Sequence[float],
                   options: Optional[ProfileOptions] = None) -> List[GrowthProfile]:
    """One profile per radius, in radius order; each radius gets a seed spawned from options.seed."""
    if f.is_zero:
        raise DegenerateSeriesError("Cannot profile the zero series")
    options = options or ProfileOptions()
    norms = homogeneous_l1_norms(f)
    radii = list(radii)
    tasks = seeded_radii(radii, options.seed)
    return WorkerPool.map(lambda task: _profile_at(f, norms, task[0], task[1], options), tasks)


# =========================================================================
# ORDER AND HYPER-ORDER
# =========================================================================

def _growth_level(profile: GrowthProfile, source: str) -> float:
    """log⁺ν̃ or log⁺log⁺ of μ̃ / M: the quantity whose slope is the order."""
    if source == "central_index":
        return log_plus(profile.central_index)
    if source == "max_term":
        return log_plus(max(0.0, profile.log_max_term))
    if source == "max_modulus":
        return log_plus(max(0.0, profile.log_M_sphere))
    raise ValueError(f"Unknown order source '{source}', expected one of {ORDER_SOURCES}")


def _growth_points(profiles: Sequence[GrowthProfile], source: str,
                   extra_logs: int) -> Tuple[np.ndarray, np.ndarray]:
    usable = sorted((p for p in profiles if p.trusted), key=lambda p: p.radius)
    if source == "max_modulus":
        usable = [p for p in usable if np.isfinite(p.log_M_sphere)]
    if len(usable) < settings.min_trusted_radii:
        raise InsufficientDataError(
            f"Need at least {settings.min_trusted_radii} trusted radii for '{source}', "
            f"got {len(usable)}")

    levels = []
    for profile in usable:
        level = _growth_level(profile, source)
        for _ in range(extra_logs):
            level = log_plus(level)
        levels.append(level)
    return np.log([p.radius for p in usable]), np.asarray(levels)


def window_slopes(x: np.ndarray, y: np.ndarray, window: Optional[int] = None) -> List[float]:
    """Least-squares slopes over every run of ``window`` consecutive points."""
    window = window or settings.order_window
    if len(x) < window:
        raise InsufficientDataError(f"Need {window} points for one slope window, got {len(x)}")
    return [float(linregress(x[i:i + window], y[i:i + window]).slope)
            for i in range(len(x) - window + 1)]


def _trailing_max_slope(x: np.ndarray, y: np.ndarray, window: Optional[int]) -> float:
    window = window or settings.order_window
    start = min(len(x) // 2, len(x) - window)
    return max(window_slopes(x[start:], y[start:], window))


def order_estimate(profiles: Sequence[GrowthProfile], source: str = "max_term",
                   window: Optional[int] = None) -> float:
    """ρ̂: largest windowed slope of the growth level against log r in the trailing half."""
    x, y = _growth_points(profiles, source, extra_logs=0)
    return _trailing_max_slope(x, y, window)


def hyper_order_estimate(profiles: Sequence[GrowthProfile], source: str = "central_index",
                         window: Optional[int] = None) -> float:
    """ρ̂₁: as order_estimate with one more log⁺ applied."""
    x, y = _growth_points(profiles, source, extra_logs=1)
    return _trailing_max_slope(x, y, window)


def infinite_order_signature(profiles: Sequence[GrowthProfile], source: str = "central_index",
                             window: Optional[int] = None) -> bool:
    """True when the last order window is steeper than the first (no finite plateau)."""
    x, y = _growth_points(profiles, source, extra_logs=0)
    slopes = window_slopes(x, y, window)
    return slopes[-1] > slopes[0]
