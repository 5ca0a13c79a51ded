"""Worst-case inputs M(t) and the worst-case error variable W.

For a Gaussian test matrix split as G = [G1; G2] with G1 = U [Sigma 0] V* and
G2 V = [X1 X2], the range-finder residual on M(t) tends (t -> inf) to

    W = || f(D, X2) [X1 Sigma^-1  I_{n-k}] ||

with D the (n-k) tail spectrum (all ones for the worst case).
"""
import math
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import LinearOperator

from sketchbound.core.linalg import (
    as_matrix,
    numerical_rank,
    orthonormal_basis,
    project_out,
    spectral_norm,
)
from sketchbound.core.rng import RngStream, derive_seed
from sketchbound.core.spectrum import Spectrum
from sketchbound.errors import InvalidDims, InvalidParameter, NoConvergence, RankDeficient
from sketchbound.models import SketchConfig, WorstCaseDecomposition, WSampleBatch
from sketchbound.rangefinder import range_finder
from sketchbound.schemas import T_CAP
from sketchbound.utils.log import get_logger
from sketchbound.utils.pool import map_ordered
from sketchbound.utils.settings import get_settings

logger = get_logger(__name__)

METHODS = ("auto", "reduced", "bartlett", "dense", "implicit")

# (n-k)(k+p) above which "auto" switches the all-ones case to the Bartlett sampler
BARTLETT_THRESHOLD = 2_000_000
# Largest n-k for which general tails build the dense (n-k) x n operator
DENSE_TAIL_LIMIT = 2000
LIMIT_T_WARNING = 1e4


def worst_case_matrix(n: int, k: int, t: float) -> Spectrum:
    """Diagonal of M(t): k entries t followed by n-k ones."""
    if not (1 <= k < n):
        raise InvalidDims(f"need 1 <= k < n, got n={n}, k={k}")
    if not (t >= 1.0 and math.isfinite(t)):
        raise InvalidParameter(f"t must be finite and >= 1, got {t}")
    return Spectrum(np.concatenate([np.full(k, float(t)), np.ones(n - k)]))


def decompose_test_matrix(G: np.ndarray, k: int) -> WorstCaseDecomposition:
    """Split G into G1 (top k rows) and G2, then rotate by G1's right singular vectors."""
    G = as_matrix(G)
    n, ell = G.shape
    if not (1 <= k < n) or ell < k:
        raise InvalidDims(f"need 1 <= k < n and k <= columns, got G {n}x{ell}, k={k}")

    G1, G2 = G[:k], G[k:]
    U, s, Vt = la.svd(G1, full_matrices=True)
    rank = numerical_rank(s)
    if rank < k:
        raise RankDeficient(rank, k, "decompose_test_matrix: G1")

    V = Vt.T
    X = G2 @ V
    return WorstCaseDecomposition(U=U, Sigma=Spectrum(s), V=V, X1=X[:, :k], X2=X[:, k:])


def _check_dims(n: int, k: int, p: int, tail: Optional[Spectrum]):
    if not (1 <= k < n):
        raise InvalidDims(f"need 1 <= k < n, got n={n}, k={k}")
    if p < 0:
        raise InvalidDims(f"oversampling p must be >= 0, got {p}")
    if k + p > n:
        raise InvalidDims(f"k + p = {k + p} exceeds n = {n}")
    if tail is not None and len(tail) != n - k:
        raise InvalidDims(f"tail has {len(tail)} values, expected n - k = {n - k}")


def resolve_method(n: int, k: int, p: int, tail: Optional[Spectrum] = None, method: str = "auto") -> str:
    """Pick the sampler; explicit choices are checked against their preconditions."""
    if method not in METHODS:
        raise InvalidParameter(f"unknown W sampling method '{method}' (expected one of {METHODS})")
    rows = n - k
    if method == "auto":
        if tail is not None:
            return "implicit"
        if rows >= k + p and rows * (k + p) > BARTLETT_THRESHOLD:
            return "bartlett"
        return "reduced"
    if method in ("reduced", "bartlett") and tail is not None:
        raise InvalidParameter(f"method '{method}' only covers the all-ones tail")
    if method == "bartlett" and rows < k + p:
        raise InvalidParameter(f"bartlett sampler needs n - k >= k + p, got {rows} < {k + p}")
    return method


def _bartlett_factor(dofs: np.ndarray, rng: RngStream) -> np.ndarray:
    """Upper triangular R with chi(dofs) on the diagonal and N(0,1) above it."""
    size = len(dofs)
    R = np.triu(rng.standard_normal((size, size)), k=1)
    R[np.diag_indices(size)] = rng.chi(dofs)
    return R


def _draw_sigma(k: int, p: int, rng: RngStream, bartlett: bool) -> np.ndarray:
    """Singular values of an independent (k+p) x k Gaussian; one retry if singular."""
    for attempt in range(2):
        if bartlett:
            factor = _bartlett_factor(k + p - np.arange(k, dtype=np.float64), rng)
        else:
            factor = rng.standard_normal((k + p, k))
        s = la.svdvals(factor)
        if numerical_rank(s) == k:
            return s
        logger.warning(f"⚠️  singular Sigma draw (attempt {attempt + 1}); redrawing")
    raise RankDeficient(numerical_rank(s), k, "sample_worst_case_error: Sigma")


def _all_ones_w(X1: np.ndarray, X2: np.ndarray, sigma: np.ndarray) -> float:
    """sqrt(1 + ||(I - Q2Q2*) X1 Sigma^-1||^2), or 0 when X2 spans everything."""
    rows = X1.shape[0]
    Q2 = orthonormal_basis(X2, allow_reduced=True)
    if Q2.shape[1] >= rows:
        return 0.0
    L = project_out(Q2, X1 / sigma[None, :])
    return math.sqrt(1.0 + spectral_norm(L) ** 2)


def _tail_operator(Y: np.ndarray, d: np.ndarray, Qd: np.ndarray) -> LinearOperator:
    """Implicit f(D, X2) [Y  I] of shape (n-k) x (k + n-k)."""
    rows, k = Y.shape

    def matvec(x):
        x = np.asarray(x).reshape(-1)
        return project_out(Qd, d * (Y @ x[:k] + x[k:]))

    def rmatvec(y):
        z = d * project_out(Qd, np.asarray(y).reshape(-1))
        return np.concatenate([Y.T @ z, z])

    return LinearOperator((rows, k + rows), matvec=matvec, rmatvec=rmatvec, dtype=np.float64)


def w_from_factors(
    X1: np.ndarray,
    X2: np.ndarray,
    sigma: np.ndarray,
    tail: Optional[Spectrum] = None,
    dense_evaluation: bool = False,
    seed: int = 0,
) -> float:
    """||f(D, X2) [X1 Sigma^-1  I]|| for given factors.

    Args:
        X1: (n-k) x k block of G2 V
        X2: (n-k) x p block of G2 V
        sigma: k singular values of G1
        tail: D as a Spectrum of length n-k; all ones when omitted
        dense_evaluation: Form the full (n-k) x n matrix instead of using the reduced
            identity (all-ones) or the implicit operator (general tail)
        seed: Start-vector seed for power iteration on large implicit operators
    """
    rows, k = X1.shape
    Y = X1 / np.asarray(sigma)[None, :]
    if tail is None and not dense_evaluation:
        return _all_ones_w(X1, X2, np.asarray(sigma))

    d = np.ones(rows) if tail is None else tail.values
    if not np.any(d):
        return 0.0
    Qd = orthonormal_basis(d[:, None] * X2, allow_reduced=True)
    if Qd.shape[1] >= rows:
        return 0.0
    if dense_evaluation or rows <= DENSE_TAIL_LIMIT:
        block = d[:, None] * np.hstack([Y, np.eye(rows)])
        return float(la.norm(project_out(Qd, block), 2))
    try:
        return spectral_norm(_tail_operator(Y, d, Qd), seed=seed)
    except NoConvergence as e:
        logger.warning(f"⚠️  W(D) norm did not converge in {e.iterations} iterations; using last estimate")
        return e.estimate


def draw_factors(n: int, k: int, p: int, rng: RngStream) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """X1 ((n-k) x k), X2 ((n-k) x p) and Sigma's k values, drawn in that order."""
    rows = n - k
    X1 = rng.standard_normal((rows, k))
    X2 = rng.standard_normal((rows, p)) if p > 0 else np.zeros((rows, 0))
    sigma = _draw_sigma(k, p, rng, bartlett=False)
    return X1, X2, sigma


def sample_worst_case_error(
    n: int,
    k: int,
    p: int,
    tail: Optional[Spectrum] = None,
    rng: Optional[RngStream] = None,
    method: str = "auto",
) -> float:
    """One draw of W (or W(D) for a tail spectrum D).

    Draws X1, X2 and then Sigma from ``rng``; the Bartlett sampler draws the
    triangular factor of [X2 X1] in place of X1 and X2.
    """
    _check_dims(n, k, p, tail)
    rng = rng or RngStream(0)
    method = resolve_method(n, k, p, tail, method)
    rows = n - k

    if method == "bartlett":
        # QR of the (n-k) x (p+k) Gaussian [X2 X1]: the X1 block's triangular factor
        # has chi(rows - p - j) diagonals, j = 0..k-1
        R = _bartlett_factor(rows - p - np.arange(k, dtype=np.float64), rng)
        sigma = _draw_sigma(k, p, rng, bartlett=True)
        norm_L = float(la.norm(R / sigma[None, :], 2))
        return math.sqrt(1.0 + norm_L**2)

    X1, X2, sigma = draw_factors(n, k, p, rng)
    if method == "reduced":
        return _all_ones_w(X1, X2, sigma)
    return w_from_factors(X1, X2, sigma, tail=tail, dense_evaluation=method == "dense", seed=rng.seed)


def l_norm_from_factors(X1: np.ndarray, X2: np.ndarray, sigma: np.ndarray) -> float:
    """||L|| with L = f(I, X2) X1 Sigma^-1."""
    Q2 = orthonormal_basis(X2, allow_reduced=True)
    return spectral_norm(project_out(Q2, X1 / np.asarray(sigma)[None, :]))


def trial_seeds(seed: int, trials: int, point_index: Optional[int] = None) -> List[int]:
    """Per-trial seeds, optionally namespaced by a grid point index."""
    prefix = () if point_index is None else (point_index,)
    return [derive_seed(seed, *prefix, trial) for trial in range(trials)]


def draw_W(
    n: int,
    k: int,
    p: int,
    seeds: List[int],
    tail: Optional[Spectrum] = None,
    method: str = "auto",
    threads: Optional[int] = None,
    progress: bool = False,
) -> np.ndarray:
    """One W draw per seed, in seed order."""
    _check_dims(n, k, p, tail)
    resolved = resolve_method(n, k, p, tail, method)
    draws = map_ordered(
        lambda trial_seed: sample_worst_case_error(n, k, p, tail, RngStream(trial_seed), resolved),
        seeds,
        threads=threads,
        progress=progress,
        desc=f"🎲 W n={n} k={k} p={p}",
    )
    return np.asarray(draws, dtype=np.float64)


def estimate_expected_W(
    n: int,
    k: int,
    p: int,
    trials: int,
    seed: int,
    tail: Optional[Spectrum] = None,
    method: str = "auto",
    threads: Optional[int] = None,
    point_index: Optional[int] = None,
    progress: bool = False,
) -> WSampleBatch:
    """Independent draws of W, one derived sub-stream per trial."""
    if trials < 2:
        raise InvalidParameter(f"estimate_expected_W needs trials >= 2, got {trials}")
    _check_dims(n, k, p, tail)
    resolved = resolve_method(n, k, p, tail, method)

    seeds = trial_seeds(seed, trials, point_index)
    return WSampleBatch(
        draws=draw_W(n, k, p, seeds, tail, resolved, threads, progress),
        n=n,
        k=k,
        p=p,
        seeds=seeds,
        tail=tail,
        method=resolved,
        base_seed=seed,
    )


def limit_residual_check(n: int, k: int, p: int, t: float, seed: int) -> Tuple[float, float]:
    """Range-finder residual on M(t) against W from the same G.

    Returns:
        (direct, via_W); they agree up to O(t^-2) for large t
    """
    if not (1 <= k < n) or p < 0 or k + p > n:
        raise InvalidDims(f"need 1 <= k < n and k + p <= n, got n={n}, k={k}, p={p}")
    limit = get_settings().dense_limit
    if n > limit:
        raise InvalidDims(f"limit_residual_check runs dense; n={n} exceeds dense limit {limit}")
    if t > T_CAP:
        raise InvalidParameter(f"t={t:g} exceeds the cap {T_CAP:g}")
    if t < LIMIT_T_WARNING:
        logger.warning(f"⚠️  t={t:g} is below {LIMIT_T_WARNING:g}; the limit identity is only approximate")

    G = RngStream(seed).standard_normal((n, k + p))
    M = worst_case_matrix(n, k, t)
    direct = range_finder(M, SketchConfig(k=k, p=p, seed=seed), test_matrix_override=G).residual_spectral

    decomposition = decompose_test_matrix(G, k)
    via_W = w_from_factors(decomposition.X1, decomposition.X2, decomposition.Sigma.values)
    return direct, via_W
