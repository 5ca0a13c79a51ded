"""Data models for sketches, factorizations and Monte Carlo batches."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from sketchbound.core.spectrum import Spectrum
from sketchbound.errors import InvalidDims, InvalidParameter

# Confidence half-width multiplier: 3 standard errors
CI_MULTIPLIER = 3.0


@dataclass
class SketchConfig:
    """Sketch parameters shared by the range finders."""
    k: int
    p: int
    q: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameter(f"target rank k must be >= 1, got {self.k}")
        if self.p < 0:
            raise InvalidParameter(f"oversampling p must be >= 0, got {self.p}")
        if self.q < 0:
            raise InvalidParameter(f"power exponent q must be >= 0, got {self.q}")

    @property
    def ell(self) -> int:
        """Sketch width l = k + p."""
        return self.k + self.p

    def validate_for(self, m: int, n: int):
        """k + p must fit inside min(m, n)."""
        if self.ell > min(m, n):
            raise InvalidDims(f"k + p = {self.ell} exceeds min(m, n) = {min(m, n)}")

    def to_dict(self) -> Dict[str, Any]:
        return {"k": self.k, "p": self.p, "q": self.q, "seed": self.seed}


@dataclass
class SVDFactors:
    """Approximate SVD A ~ U diag(S) V*."""
    U: np.ndarray
    S: Spectrum
    V: np.ndarray


@dataclass
class FactorizationResult:
    """Output of a range finder run: B = Q, C = Q*A."""
    Q: np.ndarray
    C: np.ndarray
    residual_spectral: float
    config: SketchConfig
    algorithm: str = "range_finder"

    # B is always Q here; kept for parity with the A ~ BC factorization form
    B_is_Q: bool = True
    svd: Optional[SVDFactors] = None

    # Singular values of A when computable at input size (or read off a Spectrum)
    spectrum: Optional[Spectrum] = None
    norm_converged: bool = True
    notes: List[str] = field(default_factory=list)

    @property
    def B(self) -> np.ndarray:
        return self.Q

    @property
    def sigma_kplus1(self) -> Optional[float]:
        if self.spectrum is None:
            return None
        return self.spectrum.sigma(self.config.k + 1)

    @property
    def sigma_ellplus1(self) -> Optional[float]:
        if self.spectrum is None:
            return None
        return self.spectrum.sigma(self.config.ell + 1)

    def to_dict(self) -> Dict[str, Any]:
        """Summary for JSON storage (factors are not serialized)."""
        return {
            "algorithm": self.algorithm,
            "config": self.config.to_dict(),
            "q_shape": list(self.Q.shape),
            "residual_spectral": self.residual_spectral,
            "sigma_k_plus_1": self.sigma_kplus1,
            "norm_converged": self.norm_converged,
            "has_svd": self.svd is not None,
            "notes": list(self.notes),
        }


@dataclass
class WorstCaseDecomposition:
    """Row partition G = [G1; G2], G1 = U [Sigma 0] V*, G2 V = [X1 X2]."""
    U: np.ndarray
    Sigma: Spectrum
    V: np.ndarray
    X1: np.ndarray
    X2: np.ndarray

    @property
    def k(self) -> int:
        return self.U.shape[0]

    @property
    def p(self) -> int:
        return self.X2.shape[1]


@dataclass
class MCEstimate:
    """Monte Carlo mean with a 3-standard-error half-width."""
    mean: float
    std: float
    trials: int

    def __post_init__(self):
        if self.trials < 2:
            raise InvalidParameter(f"an MC estimate needs >= 2 trials, got {self.trials}")

    @classmethod
    def from_samples(cls, samples) -> MCEstimate:
        samples = np.asarray(samples, dtype=np.float64)
        return cls(mean=float(samples.mean()), std=float(samples.std(ddof=1)), trials=int(samples.size))

    @property
    def ci_half_width(self) -> float:
        return CI_MULTIPLIER * self.std / math.sqrt(self.trials)

    def contains(self, value: float, widths: float = 1.0) -> bool:
        """``value`` within ``widths`` CI half-widths of the mean."""
        return abs(value - self.mean) <= widths * self.ci_half_width

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mean": self.mean,
            "std": self.std,
            "trials": self.trials,
            "ci_half_width": self.ci_half_width,
            "ci_convention": f"{CI_MULTIPLIER:g} standard errors",
        }


@dataclass
class WSampleBatch:
    """Independent draws of the worst-case error W."""
    draws: np.ndarray
    n: int
    k: int
    p: int
    seeds: List[int] = field(default_factory=list)
    tail: Optional[Spectrum] = None
    method: str = "auto"
    base_seed: Optional[int] = None

    @property
    def summary(self) -> MCEstimate:
        return MCEstimate.from_samples(self.draws)

    @property
    def min(self) -> float:
        return float(np.min(self.draws))

    @property
    def max(self) -> float:
        return float(np.max(self.draws))

    def rows(self) -> List[tuple]:
        """(trial, seed, W) per draw."""
        return [(i, seed, float(w)) for i, (seed, w) in enumerate(zip(self.seeds, self.draws))]

    def to_dict(self) -> Dict[str, Any]:
        summary = self.summary
        return {
            "n": self.n,
            "k": self.k,
            "p": self.p,
            "trials": len(self.draws),
            "seed": self.base_seed,
            "method": self.method,
            "tail": "ones" if self.tail is None else f"custom[{len(self.tail)}]",
            "summary": {**summary.to_dict(), "min": self.min, "max": self.max},
        }
