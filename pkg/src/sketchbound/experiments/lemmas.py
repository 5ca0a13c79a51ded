"""Property checks behind the error bounds, run as one suite.

Every check takes ``(seed, negate)`` and returns a :class:`LemmaResult` whose
``worst_slack`` is the smallest margin seen (negative = violated). ``negate``
swaps the larger and smaller operand in the monotonicity checks; a healthy suite
must then report failures. The limit checks also take the scale ``t`` of M(t).
"""
import zlib
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np
import scipy.linalg as la
from scipy.stats import ks_2samp

from sketchbound import bounds
from sketchbound.core.linalg import (
    orthonormal_basis,
    polar_orthonormal,
    project_out,
    residual_project,
    spectral_norm,
)
from sketchbound.core.rng import RngStream, derive_seed
from sketchbound.core.spectrum import Spectrum
from sketchbound.errors import InvalidParameter, NoConvergence
from sketchbound.models import SketchConfig
from sketchbound.rangefinder import power_jensen_gap, power_range_finder, randomized_svd, range_finder, reconstruction_errors
from sketchbound.schemas import T_CAP, LemmaResult, LemmaSuiteReport
from sketchbound.utils.log import get_logger
from sketchbound.utils.serialization import write_json
from sketchbound.worstcase import (
    draw_factors,
    l_norm_from_factors,
    limit_residual_check,
    sample_worst_case_error,
    w_from_factors,
    worst_case_matrix,
)

logger = get_logger(__name__)

SIGNIFICANCE = 0.01
# scale of M(t) in the limit checks
DEFAULT_LIMIT_T = 1e6

LemmaCheck = Callable[[int, bool], LemmaResult]


def _stream(seed: int, name: str, *indices: int) -> RngStream:
    """Per-check stream; keyed by name so adding checks never reseeds the others."""
    return RngStream(derive_seed(seed, zlib.crc32(name.encode()), *indices))


def _result(name: str, slacks: Iterable[float], detail: str = "") -> LemmaResult:
    slacks = np.asarray(list(slacks), dtype=np.float64)
    return LemmaResult(
        name=name,
        instances=int(slacks.size),
        failures=int(np.count_nonzero(slacks < 0)),
        worst_slack=float(slacks.min()) if slacks.size else 0.0,
        detail=detail,
    )


def _diagonal_pair(rng: RngStream, n: int):
    """Diagonals s1 >= s2 >= 0 entrywise."""
    s1 = np.abs(rng.standard_normal((n,))) + 0.1
    shrink = np.abs(rng.standard_normal((n,)))
    s2 = s1 * (shrink / (1.0 + shrink))
    return s1, s2


# Projector algebra

def check_chaining(seed: int, negate: bool = False) -> LemmaResult:
    """f(f(A, G1), G2) = f(A, [G1 G2])."""
    name = "chaining"
    rng = _stream(seed, name)
    slacks = []
    for trial in range(100):
        m, n = 6 + trial % 7, 5 + (3 * trial) % 8
        A = rng.standard_normal((m, n))
        G1, G2 = rng.standard_normal((n, 2)), rng.standard_normal((n, 2))
        chained = residual_project(residual_project(A, G1), G2)
        joint = residual_project(A, np.hstack([G1, G2]))
        slacks.append(1e-9 * la.norm(A, 2) - np.max(np.abs(chained - joint)))
    return _result(name, slacks, "entrywise, tol 1e-9 ||A||")


def check_projector_idempotence(seed: int, negate: bool = False) -> LemmaResult:
    name = "projector_idempotence"
    rng = _stream(seed, name)
    slacks = []
    for _ in range(100):
        A = rng.standard_normal((12, 10))
        G = rng.standard_normal((10, 3))
        Q = orthonormal_basis(A @ G)
        PA = project_out(Q, A)
        slacks.append(1e-10 * la.norm(A, 2) - la.norm(project_out(Q, PA) - PA, 2))
    return _result(name, slacks, "||P(PA) - PA|| <= 1e-10 ||A||")


def check_best_rank_lower_bound(seed: int, negate: bool = False) -> LemmaResult:
    """sigma_{l+1}(A) <= ||f(A, G)|| <= ||A|| for every run."""
    name = "best_rank_lower_bound"
    rng = _stream(seed, name)
    slacks = []
    for trial in range(100):
        A = rng.standard_normal((15, 12)) * (0.7 ** np.arange(12))[None, :]
        k, p = 2 + trial % 3, trial % 3
        result = range_finder(A, SketchConfig(k=k, p=p, seed=derive_seed(seed, trial)))
        norm_A = result.spectrum.norm()
        sigma = result.spectrum.sigma(k + p + 1)
        slacks.append(result.residual_spectral - (sigma - 1e-8 * norm_A))
        slacks.append(norm_A * (1 + 1e-12) - result.residual_spectral)
    return _result(name, slacks, "sigma_{l+1} - 1e-8||A|| <= residual <= ||A||")


def check_spectral_norm(seed: int, negate: bool = False) -> LemmaResult:
    """Power iteration against LAPACK's largest singular value."""
    name = "spectral_norm_agreement"
    rng = _stream(seed, name)
    slacks = []
    for trial in range(20):
        m = 20 + 9 * trial
        n = max(2, m // (2 + trial % 3))
        A = rng.standard_normal((m, n))
        exact = la.svdvals(A)[0]
        try:
            estimate = spectral_norm(A, method="power", tol=1e-10, seed=trial)
        except NoConvergence as e:
            estimate = e.estimate
        slacks.append(1e-6 - abs(estimate - exact) / exact)
    return _result(name, slacks, "relative 1e-6, up to 200 x 100")


def check_polar_scaling(seed: int, negate: bool = False) -> LemmaResult:
    """||A - polar(A)||_F = O(t^-2) for A = [I; B/t]."""
    name = "polar_t_squared"
    rng = _stream(seed, name)
    ts = (1e2, 1e3, 1e4)
    slacks = []
    for _ in range(20):
        k = 4
        B = rng.standard_normal((6, k))
        errors = [la.norm(polar_orthonormal(np.vstack([np.eye(k), B / t]))[1], "fro") for t in ts]
        for e_small_t, e_large_t in zip(errors, errors[1:]):
            ratio = e_small_t / e_large_t
            slacks.append(min(ratio - 100.0 / 1.5, 100.0 * 1.5 - ratio))
    return _result(name, slacks, "error ratio per decade of t within 100 x/÷ 1.5")


# Monotonicity

def check_single_vector_monotonicity(seed: int, negate: bool = False) -> LemmaResult:
    """||f(S1, g) x|| >= ||f(S2, g) x|| for diagonal S1 >= S2."""
    name = "single_vector_monotonicity"
    rng = _stream(seed, name)
    slacks = []
    for trial in range(100):
        n = 3 + trial % 10
        s1, s2 = _diagonal_pair(rng, n)
        if negate:
            s1, s2 = s2, s1
        g = rng.standard_normal((n, 1))
        X = rng.standard_normal((n, 5))
        larger = np.linalg.norm(residual_project(np.diag(s1), g) @ X, axis=0)
        smaller = np.linalg.norm(residual_project(np.diag(s2), g) @ X, axis=0)
        slacks.extend(larger - smaller + 1e-10)
    return _result(name, slacks, "negated" if negate else "")


def check_multi_column_monotonicity(seed: int, negate: bool = False) -> LemmaResult:
    """sigma_i(f(S1, G)) >= sigma_i(f(S2, G)) for diagonal S1 >= S2."""
    name = "multi_column_monotonicity"
    rng = _stream(seed, name)
    slacks = []
    for trial in range(100):
        n = 4 + trial % 9
        ell = 1 + trial % 4
        s1, s2 = _diagonal_pair(rng, n)
        if negate:
            s1, s2 = s2, s1
        G = rng.standard_normal((n, ell))
        larger = la.svdvals(residual_project(np.diag(s1), G))
        smaller = la.svdvals(residual_project(np.diag(s2), G))
        slacks.extend(larger - smaller + 1e-9)
    return _result(name, slacks, "negated" if negate else "")


def check_t_monotonicity(seed: int, negate: bool = False) -> LemmaResult:
    """Residual singular values of M(t) grow with t for a shared G."""
    name = "worst_case_t_monotonicity"
    rng = _stream(seed, name)
    ts = (1.0, 3.0, 10.0, 100.0, 1e3)
    slacks = []
    for trial in range(50):
        n = 5 + trial % 8
        k = 1 + trial % 3
        G = rng.standard_normal((n, k + 1))
        spectra = [la.svdvals(residual_project(worst_case_matrix(n, k, t), G)) for t in ts]
        for low, high in zip(spectra, spectra[1:]):
            if negate:
                low, high = high, low
            slacks.extend(high - low + 1e-9)
    return _result(name, slacks, "negated" if negate else "")


def check_rotational_invariance(seed: int, negate: bool = False) -> LemmaResult:
    """||f(A, G)|| and ||f(UAV, G)|| have the same law (two-sample KS)."""
    name = "rotational_invariance"
    rng = _stream(seed, name)
    A = rng.standard_normal((8, 8))
    U = la.qr(rng.standard_normal((8, 8)))[0]
    V = la.qr(rng.standard_normal((8, 8)))[0]
    rotated = U @ A @ V

    plain, turned = [], []
    for index in range(2000):
        plain.append(spectral_norm(residual_project(A, _stream(seed, name, 1, index).standard_normal((8, 2)))))
        turned.append(spectral_norm(residual_project(rotated, _stream(seed, name, 2, index).standard_normal((8, 2)))))
    pvalue = ks_2samp(plain, turned).pvalue
    return _result(name, [pvalue - SIGNIFICANCE], f"KS p-value {pvalue:.4f} over 2000 draws")


# Randomized SVD and power iteration

def check_svd_factor_identity(seed: int, negate: bool = False) -> LemmaResult:
    """||A - USV*||, ||A - QC|| and ||A - QQ*A|| agree."""
    name = "svd_factor_identity"
    rng = _stream(seed, name)
    slacks = []
    for trial in range(100):
        m = 10 + trial % 31
        n = 8 + (7 * trial) % 33
        A = rng.standard_normal((m, n))
        k = 1 + trial % 4
        p = min(trial % 5, min(m, n) - k)
        result = randomized_svd(A, SketchConfig(k=k, p=p, seed=derive_seed(seed, trial)))
        svd_error, qc_error, projection_error = reconstruction_errors(A, result)
        tol = 1e-8 * result.spectrum.norm()
        slacks.extend([
            tol - abs(svd_error - qc_error),
            tol - abs(qc_error - projection_error),
            tol - abs(svd_error - projection_error),
        ])
    return _result(name, slacks, "pairwise within 1e-8 ||A||")


def check_power_jensen(seed: int, negate: bool = False) -> LemmaResult:
    """||(I-QQ*)A|| <= ||(I-QQ*)(AA*)^q A||^(1/(2q+1))."""
    name = "power_jensen"
    rng = _stream(seed, name)
    slacks = []
    for trial in range(100):
        A = rng.standard_normal((14, 11))
        A /= la.norm(A, 2)
        result = range_finder(A, SketchConfig(k=2, p=1 + trial % 3, seed=derive_seed(seed, trial)), compute_spectrum=False)
        for q in (1, 2, 3):
            slacks.append(power_jensen_gap(A, result.Q, q) + 1e-6)
    return _result(name, slacks, "q in {1, 2, 3}, slack >= -1e-6")


# Worst-case error variable

def check_reduced_w_identity(seed: int, negate: bool = False) -> LemmaResult:
    """Reduced W equals the dense definition."""
    name = "reduced_w_identity"
    slacks = []
    for trial in range(500):
        n = 4 + trial % 37
        k = 1 + trial % max(1, min(5, n // 3))
        p = trial % max(1, min(5, n - k))
        trial_seed = derive_seed(seed, trial)
        reduced = sample_worst_case_error(n, k, p, rng=RngStream(trial_seed), method="reduced")
        dense = sample_worst_case_error(n, k, p, rng=RngStream(trial_seed), method="dense")
        slacks.append(1e-8 * max(1.0, dense) - abs(reduced - dense))
    return _result(name, slacks, "relative 1e-8, n <= 40")


def check_w_sandwich(seed: int, negate: bool = False) -> LemmaResult:
    """||L|| <= W <= ||L|| + 1."""
    name = "w_sandwich"
    slacks = []
    for trial in range(200):
        n = 10 + trial % 40
        k = 1 + trial % 5
        p = 1 + trial % 4
        X1, X2, sigma = draw_factors(n, k, p, _stream(seed, name, trial))
        w = w_from_factors(X1, X2, sigma)
        norm_L = l_norm_from_factors(X1, X2, sigma)
        slacks.append(min(w - norm_L + 1e-9, norm_L + 1.0 + 1e-9 - w))
    return _result(name, slacks, "||L|| - 1e-9 <= W <= ||L|| + 1 + 1e-9")


def check_tail_monotonicity(seed: int, negate: bool = False) -> LemmaResult:
    """W(D) <= W(I) for a tail D <= 1 and the same randomness."""
    name = "tail_monotonicity"
    rng = _stream(seed, name)
    slacks = []
    for trial in range(100):
        n = 12 + trial % 30
        k, p = 1 + trial % 4, 1 + trial % 3
        tail = Spectrum.from_unsorted(np.abs(rng.standard_normal((n - k,))) % 1.0)
        trial_seed = derive_seed(seed, trial)
        ones = sample_worst_case_error(n, k, p, rng=RngStream(trial_seed), method="reduced")
        shaped = sample_worst_case_error(n, k, p, tail=tail, rng=RngStream(trial_seed), method="implicit")
        slacks.append(ones - shaped + 1e-9)
    return _result(name, slacks, "same X1, X2, Sigma")


def check_limit_identity(seed: int, negate: bool = False, t: float = DEFAULT_LIMIT_T) -> LemmaResult:
    """The range finder on M(t) reproduces W from the same G."""
    name = "limit_identity"
    slacks = []
    for trial in range(50):
        direct, via_w = limit_residual_check(400, 20, 20, t, derive_seed(seed, zlib.crc32(name.encode()), trial))
        slacks.append(1e-4 * via_w - abs(direct - via_w))
    return _result(name, slacks, f"n=400, k=p=20, t={t:g}, relative 1e-4, 50 trials")


def check_power_limit(seed: int, negate: bool = False, t: float = DEFAULT_LIMIT_T) -> LemmaResult:
    """The power range finder (q=1) on M(t) leaves a residual of about 1."""
    name = "power_limit"
    M = worst_case_matrix(400, 20, t)
    slacks = []
    for trial in range(50):
        cfg = SketchConfig(k=20, p=20, q=1, seed=derive_seed(seed, zlib.crc32(name.encode()), trial))
        residual = power_range_finder(M, cfg).residual_spectral
        slacks.append(min(residual - 1.0 + 1e-9, 1.05 - residual))
    return _result(name, slacks, f"n=400, k=p=20, q=1, t={t:g}, residual in [1, 1.05], 50 trials")


def check_bartlett_sampler(seed: int, negate: bool = False) -> LemmaResult:
    """Bartlett and reduced W samplers draw from the same law (two-sample KS)."""
    name = "bartlett_vs_reduced"
    n, k, p = 300, 10, 10
    reduced = [sample_worst_case_error(n, k, p, rng=_stream(seed, name, 1, i), method="reduced") for i in range(1000)]
    bartlett = [sample_worst_case_error(n, k, p, rng=_stream(seed, name, 2, i), method="bartlett") for i in range(1000)]
    pvalue = ks_2samp(reduced, bartlett).pvalue
    return _result(name, [pvalue - SIGNIFICANCE], f"KS p-value {pvalue:.4f}, n={n}, k=p={k}")


# Gaussian matrix facts

def check_wishart_trace(seed: int, negate: bool = False) -> LemmaResult:
    """E||Sigma^-1||_F^2 = k/(p-1)."""
    name = "wishart_trace"
    slacks, notes = [], []
    for index, (k, p, trials) in enumerate(((2, 3, 5000), (10, 11, 2000), (100, 100, 2000))):
        estimate = bounds.estimate_sigma_inv_frob_sq(k, p, trials, derive_seed(seed, zlib.crc32(name.encode()), index))
        target = k / (p - 1)
        slacks.append(3 * estimate.ci_half_width - abs(estimate.mean - target))
        notes.append(f"({k},{p}): {estimate.mean:.4f} vs {target:.4f}")
    return _result(name, slacks, "; ".join(notes))


def check_extreme_singular_values(seed: int, negate: bool = False) -> LemmaResult:
    """sqrt(m) - sqrt(n) <= E sigma_min and E sigma_max <= sqrt(m) + sqrt(n)."""
    name = "extreme_singular_values"
    slacks = []
    for index, (m, n) in enumerate(((200, 100), (400, 100))):
        low, high = bounds.extreme_singular_value_bracket(m, n)
        smallest, largest = bounds.estimate_extreme_singular_values(
            m, n, 200, derive_seed(seed, zlib.crc32(name.encode()), index)
        )
        slacks.append(smallest.mean - (low - 3 * smallest.ci_half_width))
        slacks.append(high + 3 * largest.ci_half_width - largest.mean)
    return _result(name, slacks, "(200,100), (400,100)")


def check_pinv_bracket(seed: int, negate: bool = False) -> LemmaResult:
    """1/sqrt(m-n+1) <= E||A^+|| <= e sqrt(m)/(m-n)."""
    name = "pinv_bracket"
    slacks = []
    for index, (m, n) in enumerate(((200, 100), (150, 100), (30, 20))):
        low, high = bounds.pinv_norm_bracket(m, n)
        estimate = bounds.estimate_pinv_norm(m, n, 400, derive_seed(seed, zlib.crc32(name.encode()), index))
        margin = 3 * estimate.ci_half_width
        slacks.append(min(estimate.mean - (low - margin), high + margin - estimate.mean))
    return _result(name, slacks, "(200,100), (150,100), (30,20)")


LEMMA_CHECKS: Dict[str, LemmaCheck] = {
    "chaining": check_chaining,
    "projector_idempotence": check_projector_idempotence,
    "best_rank_lower_bound": check_best_rank_lower_bound,
    "spectral_norm_agreement": check_spectral_norm,
    "polar_t_squared": check_polar_scaling,
    "single_vector_monotonicity": check_single_vector_monotonicity,
    "multi_column_monotonicity": check_multi_column_monotonicity,
    "worst_case_t_monotonicity": check_t_monotonicity,
    "rotational_invariance": check_rotational_invariance,
    "svd_factor_identity": check_svd_factor_identity,
    "power_jensen": check_power_jensen,
    "reduced_w_identity": check_reduced_w_identity,
    "w_sandwich": check_w_sandwich,
    "tail_monotonicity": check_tail_monotonicity,
    "limit_identity": check_limit_identity,
    "power_limit": check_power_limit,
    "bartlett_vs_reduced": check_bartlett_sampler,
    "wishart_trace": check_wishart_trace,
    "extreme_singular_values": check_extreme_singular_values,
    "pinv_bracket": check_pinv_bracket,
}

MONOTONICITY_CHECKS = ("single_vector_monotonicity", "multi_column_monotonicity", "worst_case_t_monotonicity")
# checks that build M(t) and take the scale t
LIMIT_CHECKS = ("limit_identity", "power_limit")


def run_checks(
    seed: int = 0,
    negate: bool = False,
    names: Optional[List[str]] = None,
    t: float = DEFAULT_LIMIT_T,
) -> LemmaSuiteReport:
    """Run the named checks (all by default) in registry order; ``t`` scales M(t)."""
    selected = list(LEMMA_CHECKS) if names is None else names
    unknown = [name for name in selected if name not in LEMMA_CHECKS]
    if unknown:
        raise InvalidParameter(f"unknown lemma checks: {', '.join(unknown)}")
    if not 1.0 <= t <= T_CAP:
        raise InvalidParameter(f"t must lie in [1, {T_CAP:g}], got {t:g}")

    results = []
    for name in selected:
        if name in LIMIT_CHECKS:
            result = LEMMA_CHECKS[name](seed, negate, t=t)
        else:
            result = LEMMA_CHECKS[name](seed, negate)
        glyph = "✅" if result.passed else "❌"
        logger.info(f"{glyph} {name}: {result.failures}/{result.instances} failures, worst slack {result.worst_slack:.3g}")
        results.append(result)
    return LemmaSuiteReport(seed=seed, negated=negate, results=results)


def run_lemma_suite(cfg, names: Optional[List[str]] = None) -> LemmaSuiteReport:
    """Run the suite for an ExperimentConfig and write ``<table name>.json``."""
    report = run_checks(cfg.seed, cfg.self_test_negate, names or cfg.checks, t=cfg.t)
    payload = report.model_dump(mode="json")
    payload["passed"] = report.passed
    payload["failed"] = report.failed_names
    write_json(Path(cfg.output_dir) / f"{cfg.run_label}.json", payload)
    if not report.passed:
        logger.warning(f"⚠️  lemma suite failures: {', '.join(report.failed_names)}")
    return report
