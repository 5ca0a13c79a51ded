"""Closed-form error bounds and Monte Carlo estimators for the range finder.

All bounds are normalized by sigma_{k+1}; ``n`` always means min(m, n).
"""
import math
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
import scipy.linalg as la

from sketchbound.core.linalg import numerical_rank
from sketchbound.core.rng import RngStream, derive_seed
from sketchbound.core.spectrum import Spectrum
from sketchbound.errors import InvalidDims, InvalidOversampling, InvalidParameter, RankDeficient
from sketchbound.models import MCEstimate
from sketchbound.schemas import BoundSet, ESigmaInvSource
from sketchbound.utils.log import get_logger
from sketchbound.utils.pool import map_ordered

logger = get_logger(__name__)

MIN_MC_TRIALS = 100
DEFAULT_MC_TRIALS = 1000


# Closed forms

def bound_hmt(m: int, n: int, k: int, p: int) -> float:
    """Previous upper bound: 1 + 4 sqrt(k+p)/(p-1) * sqrt(min(m, n))."""
    if p < 2:
        raise InvalidOversampling(f"bound_hmt needs p >= 2, got p={p}")
    return 1.0 + (4.0 * math.sqrt(k + p) / (p - 1)) * math.sqrt(min(m, n))


def sigma_inv_norm_bounds(k: int, p: int) -> Tuple[float, float]:
    """Bracket 1/sqrt(p+1) <= E||Sigma^-1|| <= e sqrt(k+p)/p."""
    if k < 1:
        raise InvalidDims(f"k must be >= 1, got {k}")
    if p < 1:
        raise InvalidOversampling(f"sigma_inv_norm_bounds needs p >= 1, got p={p}")
    return 1.0 / math.sqrt(p + 1), math.e * math.sqrt(k + p) / p


def bound_sharp_upper(n: int, k: int, p: int, e_sigma_inv: float) -> float:
    """E W <= 1 + (sqrt(n-k) + sqrt(k)) E||Sigma^-1||."""
    if k < 1 or k >= n:
        raise InvalidDims(f"bound_sharp_upper needs 1 <= k < n, got k={k}, n={n}")
    _check_e_sigma_inv(e_sigma_inv)
    return 1.0 + (math.sqrt(n - k) + math.sqrt(k)) * e_sigma_inv


def bound_sharp_lower(n: int, k: int, p: int, e_sigma_inv: float) -> float:
    """E W >= sqrt(n - (k+p+2)) E||Sigma^-1||."""
    if n < k + p + 3:
        raise InvalidDims(f"bound_sharp_lower needs n >= k+p+3, got n={n}, k={k}, p={p}")
    _check_e_sigma_inv(e_sigma_inv)
    return math.sqrt(n - (k + p + 2)) * e_sigma_inv


def error_proxy(n: int, k: int, p: int) -> float:
    """Rule of thumb for E W when k + p << n: sqrt(n) / (sqrt(k+p) - sqrt(k))."""
    if n < 1 or k < 0:
        raise InvalidDims(f"error_proxy needs n >= 1, k >= 0, got n={n}, k={k}")
    if p < 1:
        raise InvalidOversampling(f"error_proxy needs p >= 1, got p={p}")
    return math.sqrt(n) / (math.sqrt(k + p) - math.sqrt(k))


def asymptotic_bounds(n: int, k: int, p: int) -> Tuple[float, float]:
    """Large-dimension limits (lower, upper) of W."""
    if k + p >= n:
        raise InvalidDims(f"asymptotic_bounds needs k+p < n, got k+p={k + p}, n={n}")
    if k < 0 or p < 1:
        raise InvalidDims(f"asymptotic_bounds needs k >= 0, p >= 1, got k={k}, p={p}")
    gap = math.sqrt(k + p) - math.sqrt(k)
    upper = (math.sqrt(n - k) + math.sqrt(k)) / gap
    lower = math.sqrt(n - k - p) / gap
    return lower, upper


def mixed_norm_bound(spectrum: Spectrum, k: int, p: int, e_sigma_inv: float) -> float:
    """Spectrum-aware bound (1 + sqrt(k/(p-1))) sigma_{k+1} + E||Sigma^-1|| ||tail||_F.

    Not normalized: this is a bound on E||(I - QQ*)A|| itself.
    """
    if p < 2:
        raise InvalidOversampling(f"mixed_norm_bound needs p >= 2, got p={p}")
    if len(spectrum) <= k:
        raise InvalidDims(f"spectrum length {len(spectrum)} must exceed k={k}")
    return (1.0 + math.sqrt(k / (p - 1))) * spectrum.sigma(k + 1) + e_sigma_inv * spectrum.tail_frobenius(k)


def mixed_norm_flat(n: int, k: int, p: int, e_sigma_inv: float) -> float:
    """mixed_norm_bound for the all-ones spectrum of length n, without building it."""
    if p < 2:
        raise InvalidOversampling(f"mixed_norm_bound needs p >= 2, got p={p}")
    if n <= k:
        raise InvalidDims(f"spectrum length {n} must exceed k={k}")
    return 1.0 + math.sqrt(k / (p - 1)) + e_sigma_inv * math.sqrt(n - k)


def power_trick_factor(value: float, q: int) -> float:
    """Error factor after q power iterations: value^(1/(2q+1))."""
    if q < 0:
        raise InvalidParameter(f"q must be >= 0, got {q}")
    return value ** (1.0 / (2 * q + 1))


def _check_e_sigma_inv(e_sigma_inv: float):
    if not (e_sigma_inv > 0 and math.isfinite(e_sigma_inv)):
        raise InvalidParameter(f"e_sigma_inv must be positive and finite, got {e_sigma_inv}")


# Monte Carlo estimators

def _gaussian_singular_values(rows: int, cols: int, seed: int) -> np.ndarray:
    rng = RngStream(seed)
    return la.svdvals(rng.standard_normal((rows, cols)))


def _monte_carlo(
    statistic: Callable[[int], float],
    trials: int,
    seed: int,
    threads: Optional[int] = None,
    desc: Optional[str] = None,
) -> np.ndarray:
    """Evaluate ``statistic(trial_seed)`` for every trial on its own sub-stream."""
    seeds = [derive_seed(seed, trial) for trial in range(trials)]
    return np.asarray(map_ordered(statistic, seeds, threads=threads, desc=desc), dtype=np.float64)


def _check_trials(trials: int, minimum: int = MIN_MC_TRIALS):
    if trials < minimum:
        raise InvalidParameter(f"need at least {minimum} Monte Carlo trials, got {trials}")


def estimate_sigma_inv_norm(k: int, p: int, trials: int, seed: int, threads: Optional[int] = None) -> MCEstimate:
    """E||Sigma^-1|| = E 1/sigma_min of a (k+p) x k Gaussian matrix."""
    if k < 1:
        raise InvalidDims(f"k must be >= 1, got {k}")
    if p < 1:
        raise InvalidOversampling(f"E||Sigma^-1|| is infinite for p={p}; need p >= 1")
    _check_trials(trials)

    def inverse_smallest(trial_seed: int) -> float:
        s = _gaussian_singular_values(k + p, k, trial_seed)
        if numerical_rank(s) < k:
            raise RankDeficient(numerical_rank(s), k, "estimate_sigma_inv_norm")
        return 1.0 / s[-1]

    return MCEstimate.from_samples(_monte_carlo(inverse_smallest, trials, seed, threads, "E||Sigma^-1||"))


def estimate_sigma_inv_frob_sq(k: int, p: int, trials: int, seed: int, threads: Optional[int] = None) -> MCEstimate:
    """E||Sigma^-1||_F^2; the Wishart trace identity gives k/(p-1)."""
    if k < 1:
        raise InvalidDims(f"k must be >= 1, got {k}")
    if p < 2:
        raise InvalidOversampling(f"E||Sigma^-1||_F^2 is infinite for p={p}; need p >= 2")
    _check_trials(trials)

    def inverse_frobenius_sq(trial_seed: int) -> float:
        s = _gaussian_singular_values(k + p, k, trial_seed)
        return float(np.sum(1.0 / s**2))

    return MCEstimate.from_samples(_monte_carlo(inverse_frobenius_sq, trials, seed, threads, "E||Sigma^-1||_F^2"))


def estimate_extreme_singular_values(
    m: int, n: int, trials: int, seed: int, threads: Optional[int] = None
) -> Tuple[MCEstimate, MCEstimate]:
    """(E sigma_min, E sigma_max) of an m x n Gaussian matrix, m > n."""
    if m <= n or n < 1:
        raise InvalidDims(f"need m > n >= 1, got m={m}, n={n}")
    _check_trials(trials, minimum=2)

    extremes = map_ordered(
        lambda trial_seed: _gaussian_singular_values(m, n, trial_seed)[[-1, 0]],
        [derive_seed(seed, trial) for trial in range(trials)],
        threads=threads,
    )
    extremes = np.asarray(extremes)
    return MCEstimate.from_samples(extremes[:, 0]), MCEstimate.from_samples(extremes[:, 1])


def estimate_pinv_norm(m: int, n: int, trials: int, seed: int, threads: Optional[int] = None) -> MCEstimate:
    """E||A^+|| for an m x n Gaussian matrix, m > n."""
    if m <= n or n < 1:
        raise InvalidDims(f"need m > n >= 1, got m={m}, n={n}")
    return estimate_sigma_inv_norm(n, m - n, trials, seed, threads)


def extreme_singular_value_bracket(m: int, n: int) -> Tuple[float, float]:
    """sqrt(m) - sqrt(n) <= E sigma_min <= E sigma_max <= sqrt(m) + sqrt(n)."""
    return math.sqrt(m) - math.sqrt(n), math.sqrt(m) + math.sqrt(n)


def pinv_norm_bracket(m: int, n: int) -> Tuple[float, float]:
    """1/sqrt(m-n+1) <= E||A^+|| <= e sqrt(m)/(m-n)."""
    if m <= n:
        raise InvalidDims(f"need m > n, got m={m}, n={n}")
    return 1.0 / math.sqrt(m - n + 1), math.e * math.sqrt(m) / (m - n)


# Aggregation

def resolve_e_sigma_inv(
    k: int,
    p: int,
    source: ESigmaInvSource = ESigmaInvSource.monte_carlo,
    trials: int = DEFAULT_MC_TRIALS,
    seed: int = 0,
    threads: Optional[int] = None,
) -> Tuple[float, float]:
    """E||Sigma^-1|| from the requested source as (value, CI half-width)."""
    source = ESigmaInvSource(source)
    if source is ESigmaInvSource.monte_carlo:
        estimate = estimate_sigma_inv_norm(k, p, trials, seed, threads)
        return estimate.mean, estimate.ci_half_width
    lower, upper = sigma_inv_norm_bounds(k, p)
    return (upper if source is ESigmaInvSource.closed_form_upper else lower), 0.0


def sharp_bound_inputs(k: int, p: int, e_sigma_inv: float, source: ESigmaInvSource) -> Tuple[float, float]:
    """E||Sigma^-1|| values for (sharp_lower, sharp_upper).

    A Monte Carlo mean feeds both bounds. Under a closed-form source the lower bound
    takes the bracket's lower end and the upper bound its upper end, whichever end
    ``e_sigma_inv`` reports.
    """
    if ESigmaInvSource(source) is ESigmaInvSource.monte_carlo:
        return e_sigma_inv, e_sigma_inv
    return sigma_inv_norm_bounds(k, p)


def bound_set(
    m: int,
    n: int,
    k: int,
    p: int,
    trials: int = DEFAULT_MC_TRIALS,
    seed: int = 0,
    source: ESigmaInvSource = ESigmaInvSource.monte_carlo,
    power_q: Iterable[int] = (),
    threads: Optional[int] = None,
) -> BoundSet:
    """Every bound for (m, n, k, p); components whose preconditions fail stay absent."""
    size = min(m, n)
    record = BoundSet(m=m, n=n, k=k, p=p, trials=trials, seed=seed, e_sigma_inv_source=ESigmaInvSource(source))

    def attempt(label: str, compute: Callable[[], float]):
        try:
            return compute()
        except InvalidParameter as e:
            logger.debug(f"bound_set({m},{n},{k},{p}): {label} absent ({e})")
            return None

    e_value = attempt("e_sigma_inv", lambda: resolve_e_sigma_inv(k, p, source, trials, seed, threads))
    if e_value is not None:
        record.e_sigma_inv, record.e_sigma_inv_ci = e_value

    record.hmt_upper = attempt("hmt", lambda: bound_hmt(m, n, k, p))
    record.proxy = attempt("proxy", lambda: error_proxy(size, k, p))
    asymptotic = attempt("asymptotic", lambda: asymptotic_bounds(size, k, p))
    if asymptotic is not None:
        record.asymptotic_lower, record.asymptotic_upper = asymptotic

    if record.e_sigma_inv is not None:
        e_low, e_high = sharp_bound_inputs(k, p, record.e_sigma_inv, record.e_sigma_inv_source)
        record.e_sigma_inv_lower, record.e_sigma_inv_upper = e_low, e_high
        record.sharp_upper = attempt("sharp_upper", lambda: bound_sharp_upper(size, k, p, e_high))
        record.sharp_lower = attempt("sharp_lower", lambda: bound_sharp_lower(size, k, p, e_low))
        record.mixed_norm_flat = attempt("mixed_norm", lambda: mixed_norm_flat(size, k, p, e_high))

    if record.proxy is not None:
        record.power_proxy = {q: power_trick_factor(record.proxy, q) for q in power_q}
    return record
