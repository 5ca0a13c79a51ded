"""Randomized range finders (plain, SVD and power variants) and residual reporting."""
import math
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
import scipy.linalg as la

from sketchbound import bounds
from sketchbound.core.linalg import (
    Operand,
    apply,
    apply_adjoint,
    as_matrix,
    dense,
    gaussian_matrix,
    operand_shape,
    orthonormal_basis,
    project_out,
    residual_operator,
    singular_values,
    spectral_norm,
)
from sketchbound.core.rng import TEST_MATRIX_KEY, RngStream, derive_seed
from sketchbound.core.spectrum import Spectrum
from sketchbound.errors import DimensionMismatch, InvalidParameter, NoConvergence, Overflow, RankDeficient
from sketchbound.models import FactorizationResult, SketchConfig, SVDFactors
from sketchbound.schemas import ESigmaInvSource, ResidualReport
from sketchbound.utils.log import get_logger
from sketchbound.utils.settings import get_settings

logger = get_logger(__name__)

Stabilizer = Literal["qr", "columns", "none"]

OVERFLOW_LIMIT = 1e300


def _prepare(A: Union[np.ndarray, Spectrum]) -> Operand:
    return A if isinstance(A, Spectrum) else as_matrix(A)


def test_matrix(n: int, cfg: SketchConfig) -> np.ndarray:
    """The n x (k+p) Gaussian test matrix G drawn from ``cfg.seed``."""
    return gaussian_matrix(n, cfg.ell, RngStream(derive_seed(cfg.seed, TEST_MATRIX_KEY)))


def _resolve_test_matrix(m: int, n: int, cfg: SketchConfig, override: Optional[np.ndarray]) -> np.ndarray:
    G = test_matrix(n, cfg) if override is None else as_matrix(override)
    if G.shape[0] != n:
        raise DimensionMismatch(f"A is {m}x{n} but G has {G.shape[0]} rows")
    return G


def _basis(H: np.ndarray, strict: bool, notes: List[str]) -> np.ndarray:
    try:
        return orthonormal_basis(H, allow_reduced=not strict, context="range_finder", notes=notes)
    except RankDeficient as e:
        raise RankDeficient(e.rank, e.width, f"sketch AG of width {H.shape[1]} (strict mode)") from e


def _residual_norm(A: Operand, Q: np.ndarray, seed: int, notes: List[str]) -> Tuple[float, bool]:
    """||(I - QQ*)A||, dense when small, implicit otherwise."""
    m, n = operand_shape(A)
    if min(m, n) <= get_settings().dense_limit:
        return spectral_norm(project_out(Q, dense(A))), True
    try:
        return spectral_norm(residual_operator(A, Q), seed=seed), True
    except NoConvergence as e:
        message = f"residual norm did not converge in {e.iterations} iterations; reporting last estimate"
        logger.warning(f"⚠️  {message}")
        notes.append(message)
        return e.estimate, False


def _spectrum_if_affordable(A: Operand, notes: List[str]) -> Optional[Spectrum]:
    if isinstance(A, Spectrum):
        return A
    if min(A.shape) <= get_settings().dense_limit:
        return singular_values(A)
    notes.append(f"singular values not computed (min(m, n) = {min(A.shape)} above dense limit)")
    return None


def _finish(
    A: Operand,
    Q: np.ndarray,
    cfg: SketchConfig,
    algorithm: str,
    notes: List[str],
    compute_spectrum: bool,
) -> FactorizationResult:
    C = apply_adjoint(A, Q).T
    residual, converged = _residual_norm(A, Q, cfg.seed, notes)
    spectrum = _spectrum_if_affordable(A, notes) if compute_spectrum else None
    return FactorizationResult(
        Q=Q,
        C=C,
        residual_spectral=residual,
        config=cfg,
        algorithm=algorithm,
        spectrum=spectrum,
        norm_converged=converged,
        notes=notes,
    )


def range_finder(
    A: Union[np.ndarray, Spectrum],
    cfg: SketchConfig,
    test_matrix_override: Optional[np.ndarray] = None,
    strict: bool = False,
    compute_spectrum: bool = True,
) -> FactorizationResult:
    """Range finder: Q = orth(AG), C = Q*A.

    Args:
        A: m x n matrix, or a Spectrum for a square diagonal input
        cfg: Sketch configuration (q is ignored here)
        test_matrix_override: Use this G instead of drawing one from ``cfg.seed``
        strict: Raise RankDeficient instead of falling back to a reduced basis
        compute_spectrum: Compute A's singular values for reporting

    Returns:
        FactorizationResult with residual_spectral = ||(I - QQ*)A||
    """
    A = _prepare(A)
    m, n = operand_shape(A)
    cfg.validate_for(m, n)
    G = _resolve_test_matrix(m, n, cfg, test_matrix_override)

    notes: List[str] = []
    Q = _basis(apply(A, G), strict, notes)
    return _finish(A, Q, cfg, "range_finder", notes, compute_spectrum)


def randomized_svd(
    A: Union[np.ndarray, Spectrum],
    cfg: SketchConfig,
    strict: bool = False,
    stabilizer: Stabilizer = "qr",
) -> FactorizationResult:
    """Randomized SVD: range finder (or its power variant when q > 0), then SVD of C = Q*A."""
    if cfg.q > 0:
        result = power_range_finder(A, cfg, stabilizer=stabilizer, strict=strict)
    else:
        result = range_finder(A, cfg, strict=strict)
    U_hat, s, Vt = la.svd(result.C, full_matrices=False)
    result.svd = SVDFactors(U=result.Q @ U_hat, S=Spectrum.from_unsorted(s), V=Vt.T)
    result.algorithm = "randomized_svd"
    return result


def _stabilize(X: np.ndarray, stabilizer: Stabilizer, notes: List[str], product: int) -> np.ndarray:
    if stabilizer == "qr":
        return la.qr(X, mode="economic")[0]
    norms = np.linalg.norm(X, axis=0)
    if stabilizer == "columns":
        return X / np.where(norms > 0, norms, 1.0)
    if not np.all(np.isfinite(X)):
        error = Overflow(product, notes)
        logger.error(f"❌ {error}")
        raise error
    if np.any(norms > OVERFLOW_LIMIT) and not any("overflow" in note for note in notes):
        message = "overflow: sketch column norms exceed 1e300; renormalize between products"
        logger.warning(f"⚠️  {message}")
        notes.append(message)
    return X


def power_range_finder(
    A: Union[np.ndarray, Spectrum],
    cfg: SketchConfig,
    stabilizer: Stabilizer = "qr",
    strict: bool = False,
    test_matrix_override: Optional[np.ndarray] = None,
    compute_spectrum: bool = True,
) -> FactorizationResult:
    """Power range finder: Q = orth((AA*)^q AG) by 2q+1 alternating products.

    The sketch is re-stabilized after every product (``"qr"`` orthonormalizes,
    ``"columns"`` rescales each column, ``"none"`` follows the textbook recursion). With
    ``"none"``, column norms above 1e300 are noted and a product that is no longer finite
    raises Overflow. Every choice leaves the range unchanged in exact arithmetic.
    """
    if cfg.q < 1:
        raise InvalidParameter(f"power_range_finder needs q >= 1, got q={cfg.q}")
    A = _prepare(A)
    m, n = operand_shape(A)
    cfg.validate_for(m, n)
    G = _resolve_test_matrix(m, n, cfg, test_matrix_override)

    notes: List[str] = []
    if stabilizer != "none":
        notes.append(f"power iteration stabilized with '{stabilizer}' between products")

    H = _stabilize(apply(A, G), stabilizer, notes, 1)
    for step in range(cfg.q):
        H = _stabilize(apply_adjoint(A, H), stabilizer, notes, 2 * step + 2)
        H = _stabilize(apply(A, H), stabilizer, notes, 2 * step + 3)

    Q = _basis(H, strict, notes)
    return _finish(A, Q, cfg, "power_range_finder", notes, compute_spectrum)


def run(A: Union[np.ndarray, Spectrum], cfg: SketchConfig, algorithm: str = "auto", **kwargs) -> FactorizationResult:
    """Dispatch by name: ``range``, ``svd``, ``power`` or ``auto`` (power when q > 0)."""
    if algorithm == "auto":
        algorithm = "power" if cfg.q > 0 else "range"
    if algorithm == "range":
        if cfg.q > 0:
            raise InvalidParameter(f"algorithm 'range' runs no power iterations; use 'power' or 'svd' for q={cfg.q}")
        return range_finder(A, cfg, **kwargs)
    if algorithm == "svd":
        return randomized_svd(A, cfg, **kwargs)
    if algorithm == "power":
        return power_range_finder(A, cfg, **kwargs)
    raise InvalidParameter(f"unknown algorithm '{algorithm}'")


def reconstruction_errors(A: Union[np.ndarray, Spectrum], result: FactorizationResult) -> Tuple[float, float, float]:
    """(||A - USV*||, ||A - QC||, ||A - QQ*A||); equal in exact arithmetic."""
    if result.svd is None:
        raise InvalidParameter("reconstruction_errors needs a randomized_svd result")
    A_dense = dense(_prepare(A))
    svd = result.svd
    usv = (svd.U * svd.S.values[None, :]) @ svd.V.T
    qc = result.Q @ result.C
    return (
        spectral_norm(A_dense - usv),
        spectral_norm(A_dense - qc),
        spectral_norm(project_out(result.Q, A_dense)),
    )


def power_jensen_gap(A: np.ndarray, Q: np.ndarray, q: int) -> float:
    """||(I-QQ*)(AA*)^q A||^(1/(2q+1)) - ||(I-QQ*)A||, nonnegative for any projector."""
    A = as_matrix(A)
    powered = A
    for _ in range(q):
        powered = A @ (A.T @ powered)
    return spectral_norm(project_out(Q, powered)) ** (1.0 / (2 * q + 1)) - spectral_norm(project_out(Q, A))


def residual_report(
    A: Union[np.ndarray, Spectrum],
    result: FactorizationResult,
    bound_trials: int = bounds.DEFAULT_MC_TRIALS,
    source: ESigmaInvSource = ESigmaInvSource.monte_carlo,
    include_bounds: bool = True,
) -> ResidualReport:
    """Residual vs sigma_{k+1}, tail energy and the matching bound set."""
    A = _prepare(A)
    m, n = operand_shape(A)
    cfg = result.config
    if result.Q.shape[0] != m or result.C.shape[1] != n:
        raise DimensionMismatch(f"result factors do not match a {m}x{n} input")

    notes = list(result.notes)
    spectrum = result.spectrum if result.spectrum is not None else _spectrum_if_affordable(A, notes)
    residual = result.residual_spectral

    sigma = ratio = frob_tail = None
    convention = "not_computed"
    if spectrum is not None:
        sigma = spectrum.sigma(cfg.k + 1)
        frob_tail = spectrum.tail_frobenius(cfg.k)
        # exactly zero residuals come from exact low rank; round-off level counts as zero
        zero_residual = residual <= 1e-12 * max(spectrum.norm(), 1e-300)
        if sigma > 0:
            ratio, convention = residual / sigma, "finite"
        elif zero_residual or residual == 0.0:
            ratio, convention = 1.0, "one_by_convention"
        else:
            ratio, convention = math.inf, "infinite"

    bound_record = None
    mixed = None
    if include_bounds:
        bound_record = bounds.bound_set(m, n, cfg.k, cfg.p, trials=bound_trials, seed=cfg.seed, source=source)
        if spectrum is not None and bound_record.e_sigma_inv_upper is not None and cfg.p >= 2 and len(spectrum) > cfg.k:
            mixed = bounds.mixed_norm_bound(spectrum, cfg.k, cfg.p, bound_record.e_sigma_inv_upper)

    return ResidualReport(
        residual_spectral=residual,
        sigma_k_plus_1=sigma,
        ratio=ratio,
        ratio_convention=convention,
        frob_tail=frob_tail,
        mixed_norm_bound=mixed,
        bounds=bound_record,
        config=cfg.to_dict(),
        seed=cfg.seed,
        algorithm=result.algorithm,
        norm_converged=result.norm_converged,
        notes=notes,
    )
