"""Core numerical kernels: RNG streams, spectra and dense/implicit linear algebra."""
from sketchbound.core.linalg import (
    as_matrix,
    gaussian_matrix,
    orthonormal_basis,
    polar_orthonormal,
    residual_project,
    singular_values,
    spectral_norm,
)
from sketchbound.core.rng import RngStream, derive_seed
from sketchbound.core.spectrum import Spectrum

__all__ = [
    "RngStream",
    "Spectrum",
    "as_matrix",
    "derive_seed",
    "gaussian_matrix",
    "orthonormal_basis",
    "polar_orthonormal",
    "residual_project",
    "singular_values",
    "spectral_norm",
]
