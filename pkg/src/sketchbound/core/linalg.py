"""Deterministic numerical kernels.

Gaussian sampling, Householder orthonormalization, the residual projector
f(A, G) = (I - QQ*)A, spectral norms of dense or implicit operators and SVD access.
Inputs may be dense float64 matrices or a :class:`Spectrum` standing for a square
diagonal matrix.
"""
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from sketchbound.core.rng import POWER_ITERATION_KEY, RngStream, derive_seed
from sketchbound.core.spectrum import Spectrum
from sketchbound.errors import (
    DimensionMismatch,
    InvalidDims,
    InvalidMatrix,
    NoConvergence,
    RankDeficient,
)
from sketchbound.utils.log import get_logger
from sketchbound.utils.settings import get_settings

logger = get_logger(__name__)

Operand = Union[np.ndarray, Spectrum]

RANK_TOL = 1e-12
POWER_TOL = 1e-8
POWER_MAX_ITER = 10_000


def as_matrix(A) -> np.ndarray:
    """Validate and convert to a finite 2-D float64 array."""
    array = np.asarray(A, dtype=np.float64)
    if array.ndim != 2:
        raise InvalidMatrix(f"expected a 2-D matrix, got shape {array.shape}")
    if array.shape[0] < 1 or array.shape[1] < 1:
        raise InvalidMatrix(f"matrix dimensions must be positive, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidMatrix("matrix entries must be finite (no NaN/Inf)")
    return array


def operand_shape(A: Operand) -> Tuple[int, int]:
    return A.shape if isinstance(A, Spectrum) else np.shape(A)


def apply(A: Operand, X: np.ndarray) -> np.ndarray:
    """A @ X without materializing diagonal operands."""
    if isinstance(A, Spectrum):
        return A.values[:, None] * X if X.ndim == 2 else A.values * X
    return A @ X


def apply_adjoint(A: Operand, Y: np.ndarray) -> np.ndarray:
    """A* @ Y without materializing diagonal operands."""
    if isinstance(A, Spectrum):
        return A.values[:, None] * Y if Y.ndim == 2 else A.values * Y
    return A.T @ Y


def dense(A: Operand) -> np.ndarray:
    return A.as_diagonal() if isinstance(A, Spectrum) else A


def gaussian_matrix(rows: int, cols: int, rng: RngStream) -> np.ndarray:
    """rows x cols matrix of i.i.d. standard normal draws from ``rng``."""
    if rows < 1 or cols < 1:
        raise InvalidDims(f"gaussian_matrix needs positive sizes, got {rows}x{cols}")
    return rng.standard_normal((rows, cols))


def numerical_rank(singular: np.ndarray, tol: float = RANK_TOL) -> int:
    """Count of singular values above ``tol`` times the largest."""
    if singular.size == 0 or singular[0] == 0.0:
        return 0
    return int(np.count_nonzero(singular > tol * singular[0]))


def orthonormal_basis(
    H: np.ndarray,
    allow_reduced: bool = False,
    context: str = "",
    notes: Optional[List[str]] = None,
) -> np.ndarray:
    """Orthonormal basis for range(H) via Householder QR.

    Args:
        H: m x l sketch
        allow_reduced: Return a basis of the numerical range (fewer columns) instead
            of raising when H is rank deficient
        context: Prefix for the RankDeficient message
        notes: Decision log the reduced-basis event is appended to

    Returns:
        Q with orthonormal columns spanning range(H)

    Raises:
        RankDeficient: numerical rank < l and ``allow_reduced`` is False
    """
    H = np.asarray(H, dtype=np.float64)
    m, width = H.shape
    if width == 0:
        return np.zeros((m, 0))

    Q, R = la.qr(H, mode="economic")
    # H = QR, so R carries H's singular values
    U_r, s, _ = la.svd(R, full_matrices=False)
    rank = numerical_rank(s)
    if rank == width:
        return Q

    if not allow_reduced:
        raise RankDeficient(rank, width, context or "orthonormal_basis")

    message = f"sketch is rank deficient ({rank} < {width}); using reduced-width basis"
    logger.info(f"⚠️  {context + ': ' if context else ''}{message}")
    if notes is not None:
        notes.append(message)
    return Q @ U_r[:, :rank]


def residual_project(A: Operand, G: np.ndarray, notes: Optional[List[str]] = None) -> np.ndarray:
    """f(A, G) = (I - QQ*)A with Q an orthonormal basis of range(AG).

    A rank-deficient AG yields the projector of its numerical range.
    """
    m, n = operand_shape(A)
    if G.ndim != 2 or G.shape[0] != n:
        raise DimensionMismatch(f"A is {m}x{n} but G has shape {G.shape}")
    Q = orthonormal_basis(apply(A, G), allow_reduced=True, context="residual_project", notes=notes)
    return project_out(Q, dense(A))


def project_out(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    """(I - QQ*)X."""
    return X - Q @ (Q.T @ X)


def residual_operator(A: Operand, Q: np.ndarray) -> LinearOperator:
    """Implicit (I - QQ*)A; the m x n residual is never formed."""
    m, n = operand_shape(A)

    def matvec(x):
        return project_out(Q, apply(A, x))

    def rmatvec(y):
        return apply_adjoint(A, project_out(Q, y))

    return LinearOperator((m, n), matvec=matvec, rmatvec=rmatvec, matmat=matvec, rmatmat=rmatvec, dtype=np.float64)


def spectral_norm(
    op,
    method: str = "auto",
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
    seed: int = 0,
) -> float:
    """Largest singular value of a matrix, Spectrum or LinearOperator.

    ``method="auto"`` uses the dense LAPACK 2-norm for arrays whose smaller side is
    within the dense limit and power iteration on op* op otherwise;
    ``method="power"`` always iterates.

    Raises:
        NoConvergence: eigen-residual still above ``tol`` after ``max_iter`` steps
            (the exception carries the last estimate)
    """
    if isinstance(op, Spectrum):
        return op.norm()
    if isinstance(op, np.ndarray):
        if op.size == 0:
            return 0.0
        if method == "auto" and min(op.shape) <= get_settings().dense_limit:
            return float(la.norm(op, 2))
        op = aslinearoperator(op)
    elif not isinstance(op, LinearOperator):
        op = aslinearoperator(op)
    return power_iteration_norm(op, tol=tol, max_iter=max_iter, seed=seed)


def power_iteration_norm(
    op: LinearOperator,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
    seed: int = 0,
) -> float:
    """Power iteration on op* op from a seeded Gaussian start vector.

    Stops once the eigen-residual ||op* op x - lambda x|| of the unit iterate x, with
    lambda = ||op x||^2, is at most ``tol * lambda``, which keeps lambda within
    ``tol * lambda`` of an eigenvalue of op* op.
    """
    m, n = op.shape
    if m == 0 or n == 0:
        return 0.0

    rng = RngStream(derive_seed(seed, POWER_ITERATION_KEY))
    x = rng.standard_normal((n,))
    x /= np.linalg.norm(x)

    estimate = 0.0
    residual = None
    for _ in range(max_iter):
        y = op.matvec(x)
        estimate = float(np.linalg.norm(y))
        if estimate == 0.0:
            return 0.0
        z = op.rmatvec(y)
        rayleigh = estimate**2
        residual = float(np.linalg.norm(z - rayleigh * x)) / rayleigh
        if residual <= tol:
            return estimate
        z_norm = float(np.linalg.norm(z))
        if z_norm == 0.0:
            return estimate
        x = z / z_norm

    raise NoConvergence(estimate, max_iter, residual)


def singular_values(A: Operand) -> Spectrum:
    """All min(m, n) singular values, non-increasing."""
    if isinstance(A, Spectrum):
        return A
    return Spectrum.from_unsorted(la.svdvals(as_matrix(A)))


def polar_orthonormal(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Nearest matrix with orthonormal columns and the same range.

    Returns:
        (Q, E) with Q = UV* from the reduced SVD A = USV* and E = A - Q
    """
    A = as_matrix(A)
    U, s, Vt = la.svd(A, full_matrices=False)
    rank = numerical_rank(s)
    if rank < A.shape[1]:
        raise RankDeficient(rank, A.shape[1], "polar_orthonormal")
    Q = U @ Vt
    return Q, A - Q
