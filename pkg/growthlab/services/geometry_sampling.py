"""
Sampling and search on the sphere S(r) and the determining torus.

``sample_sigma`` draws from the unitarily invariant probability measure σ on
S(r); the max-modulus searches run multi-start Powell from scipy over a chart
of the sphere (z = r·w/‖w‖, w ∈ C^m as 2m reals) or over the torus phases.
Start points come from ``SeedSequence(seed).spawn(restarts)``, so the first k
starts are the same whatever ``restarts`` is and the best value can only
grow with more restarts. Log-moduli come with brackets from their rounding
error; samples are redrawn only where a maximum is wanted, never for a mean.
"""

import logging
import math
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize

from growthlab.config.settings import settings
from growthlab.entities.growth import TrustPolicy
from growthlab.entities.power_series import PowerSeries
from growthlab.entities.quotient import Quotient
from growthlab.entities.sampling import SphereSample, TorusPoint
from growthlab.services.series_core import evaluate_closed_form, evaluate_many, require_trusted
from growthlab.utils.logmag import LOG_ZERO

logger = logging.getLogger(__name__)

Evaluable = Union[PowerSeries, Quotient]

# Objective value standing in for log|f| = −∞ inside the optimizer.
_FLOOR_PENALTY = 1e12
# Relative accuracy of a closed form per unit of |log f|.
_CLOSED_FORM_ROUNDING = 16 * np.finfo(float).eps


# =========================================================================
# σ SAMPLING
# =========================================================================

def sample_sigma(m: int, r: float, count: int, seed: int) -> SphereSample:
    """count i.i.d. σ-points on S(r): complex Gaussian vectors scaled to norm r."""
    if m < 1:
        raise ValueError(f"Dimension must be >= 1, got {m}")
    if not r > 0:
        raise ValueError(f"Radius must be positive, got {r}")
    if count < 1:
        raise ValueError(f"Sample count must be >= 1, got {count}")

    rng = np.random.default_rng(seed)
    gaussian = rng.standard_normal((count, m)) + 1j * rng.standard_normal((count, m))
    norms = np.linalg.norm(gaussian, axis=1)
    points = r * gaussian / norms[:, None]
    return SphereSample(points=points, radius=float(r), seed=seed)


# =========================================================================
# GUARDED LOG-MODULUS
# =========================================================================

class GuardedLogModulus(NamedTuple):
    """log|f| at sample points and an interval [lower, upper] sure to contain it."""

    log_abs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def reliable(self) -> np.ndarray:
        """Points whose rounding error stays below |f|; exact zeros count as reliable."""
        with np.errstate(invalid="ignore"):
            exact_zero = (self.lower == LOG_ZERO) & (self.upper == LOG_ZERO)
        return (np.isfinite(self.lower) & np.isfinite(self.upper)) | exact_zero

    def clipped(self) -> "GuardedLogModulus":
        """The same brackets for log⁺|f|."""
        return GuardedLogModulus(np.maximum(0.0, self.log_abs), np.maximum(0.0, self.lower),
                                 np.maximum(0.0, self.upper))


def _bracket(log_abs: np.ndarray, log_error: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Bounds on log|f| when the computed |f| is off by at most exp(log_error)."""
    with np.errstate(invalid="ignore", divide="ignore"):
        upper = np.logaddexp(log_abs, log_error)
        gap = np.minimum(log_error - log_abs, 0.0)
        lower = np.where(log_error < log_abs, log_abs + np.log1p(-np.exp(gap)), LOG_ZERO)
    return lower, upper


def log_modulus(f: Evaluable, points) -> GuardedLogModulus:
    """
    log|f(z)| for a series or a quotient g/h, bracketed by its rounding error.

    A series carrying a closed form is evaluated through it. Otherwise the
    term sum is trusted to ``cancellation_digits`` decades below the majorant
    Σ|a_α z^α|, and a value below that has lower bound −∞. For a quotient the
    brackets of g and h combine; a denominator under ``denominator_floor``
    leaves the upper end at +∞.
    """
    if isinstance(f, Quotient):
        top = log_modulus(f.numerator, points)
        bottom = log_modulus(f.denominator, points)
        with np.errstate(invalid="ignore"):
            log_abs = top.log_abs - bottom.log_abs
            lower = top.lower - bottom.upper
            upper = np.where(bottom.log_abs > math.log(settings.denominator_floor),
                             top.upper - bottom.lower, np.inf)
        return GuardedLogModulus(log_abs, lower, upper)

    if f.log_closed_form is not None:
        logs = evaluate_closed_form(f, points)
        log_abs = logs.real
        log_error = log_abs + np.log(_CLOSED_FORM_ROUNDING * (1.0 + np.abs(logs)))
    else:
        batch = evaluate_many(f, points)
        log_abs = batch.log_abs
        log_error = batch.log_majorants - settings.cancellation_digits * math.log(10.0)
    lower, upper = _bracket(log_abs, log_error)
    return GuardedLogModulus(log_abs, lower, upper)


# =========================================================================
# MAXIMUM MODULUS SEARCH
# =========================================================================

def _start_generators(seed: int, restarts: int):
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(restarts)]


def _point_log_abs(f: PowerSeries, point: np.ndarray) -> float:
    return float(evaluate_many(f, point[None, :]).log_abs[0])


def _objective(value: float) -> float:
    return -value if np.isfinite(value) else _FLOOR_PENALTY


def _sphere_point(w: np.ndarray, m: int, r: float) -> np.ndarray:
    z = w[:m] + 1j * w[m:]
    norm = np.linalg.norm(z)
    if norm == 0:
        z = np.zeros(m, dtype=complex)
        z[0] = 1.0
        norm = 1.0
    return r * z / norm


def _powell(objective, start: np.ndarray):
    tolerance = settings.polish_tolerance
    return minimize(objective, start, method="Powell",
                    options={"xtol": tolerance, "ftol": tolerance, "maxfev": 20000})


def max_modulus_sphere(f: PowerSeries, r: float, restarts: Optional[int] = None, seed: int = 0,
                       policy: Optional[TrustPolicy] = None,
                       acknowledge_untrusted: bool = False) -> Tuple[float, np.ndarray]:
    """Best log|f| found on S(r) and its point."""
    restarts = restarts or settings.sphere_restarts
    require_trusted(f, [r], policy, acknowledge_untrusted)
    m = f.dimension

    best_value, best_point = LOG_ZERO, _sphere_point(np.eye(1, 2 * m)[0], m, r)
    if f.is_zero:
        return best_value, best_point
    if f.is_constant:
        return _point_log_abs(f, best_point), best_point

    def objective(w: np.ndarray) -> float:
        return _objective(_point_log_abs(f, _sphere_point(w, m, r)))

    for rng in _start_generators(seed, restarts):
        result = _powell(objective, rng.standard_normal(2 * m))
        point = _sphere_point(np.asarray(result.x, dtype=float), m, r)
        value = _point_log_abs(f, point)
        if value > best_value:
            best_value, best_point = value, point

    logger.debug("max_modulus_sphere r=%.6g restarts=%d -> %.10g", r, restarts, best_value)
    return best_value, best_point


def max_modulus_torus(f: PowerSeries, r: float, restarts: Optional[int] = None, seed: int = 0,
                      policy: Optional[TrustPolicy] = None,
                      acknowledge_untrusted: bool = False) -> Tuple[float, TorusPoint]:
    """Best log|f| found on {|z_j| = r} and the phases attaining it."""
    restarts = restarts or settings.sphere_restarts
    require_trusted(f, [r], policy, acknowledge_untrusted)
    m = f.dimension

    best_value, best_phases = LOG_ZERO, np.zeros(m)
    if f.is_zero:
        return best_value, TorusPoint(tuple(best_phases), float(r))
    if f.is_constant:
        return _point_log_abs(f, TorusPoint((0.0,) * m, r).point), TorusPoint((0.0,) * m, float(r))

    def objective(theta: np.ndarray) -> float:
        return _objective(_point_log_abs(f, r * np.exp(1j * theta)))

    for rng in _start_generators(seed, restarts):
        result = _powell(objective, rng.uniform(0.0, 2 * math.pi, m))
        phases = np.mod(np.asarray(result.x, dtype=float), 2 * math.pi)
        value = _point_log_abs(f, r * np.exp(1j * phases))
        if value > best_value:
            best_value, best_phases = value, phases

    logger.debug("max_modulus_torus r=%.6g restarts=%d -> %.10g", r, restarts, best_value)
    return best_value, TorusPoint(tuple(float(p) for p in best_phases), float(r))


# =========================================================================
# SEEDS AND RESAMPLING
# =========================================================================

def seeded_radii(radii: Sequence[float], seed: int) -> List[Tuple[float, int]]:
    """
    (r, seed_r) for each radius, seed_r spawned from ``seed``.

    Radius k gets the k-th child of ``SeedSequence(seed)`` whatever the job
    count, so parallel and serial runs draw the same samples.
    """
    children = np.random.SeedSequence(seed).spawn(len(radii))
    return [(r, int(child.generate_state(1)[0])) for r, child in zip(radii, children)]


def _round_seed(seed: int, round_number: int) -> int:
    return int(np.random.SeedSequence([seed, round_number]).generate_state(1)[0])


def sample_until_usable(m: int, count: int, seed: int,
                        values_at: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]
                        ) -> Tuple[np.ndarray, np.ndarray]:
    """
    Values of ``values_at`` at count σ-directions on the unit sphere.

    ``values_at`` returns (values, usable). Unusable directions are redrawn,
    up to ``resample_rounds`` times, from seeds derived from (seed, round);
    the returned mask marks what is still unusable after that. The redrawn
    sample is no longer σ-distributed: use it for maxima over the sphere,
    never for averages.
    """
    directions = sample_sigma(m, 1.0, count, seed).points
    values, usable = values_at(directions)
    values, usable = np.array(values), np.array(usable, dtype=bool)

    for round_number in range(1, settings.resample_rounds + 1):
        bad = np.flatnonzero(~usable)
        if bad.size == 0:
            break
        fresh = sample_sigma(m, 1.0, bad.size, _round_seed(seed, round_number)).points
        values[bad], usable[bad] = values_at(fresh)
    return values, usable
