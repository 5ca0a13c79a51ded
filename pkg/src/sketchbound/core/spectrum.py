"""Spectrum: a non-increasing vector of nonnegative singular values.

Also stands in for a square diagonal matrix (the worst-case inputs M(t), tails
D_{n-k}) so large diagonal inputs are never materialized.
"""
from __future__ import annotations

from typing import Iterable, Union

import numpy as np

from sketchbound.errors import InvalidMatrix


class Spectrum:
    """Immutable sorted singular values."""

    __slots__ = ("_values",)

    def __init__(self, values: Union[Iterable[float], np.ndarray]):
        array = np.array(values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(array)):
            raise InvalidMatrix("spectrum entries must be finite")
        if np.any(array < 0):
            raise InvalidMatrix("spectrum entries must be nonnegative")
        if np.any(np.diff(array) > 0):
            raise InvalidMatrix("spectrum must be sorted non-increasing")
        array.setflags(write=False)
        self._values = array

    @classmethod
    def from_unsorted(cls, values: Union[Iterable[float], np.ndarray]) -> Spectrum:
        """Sort descending; magnitudes are taken (diagonal entries of any sign)."""
        array = np.abs(np.array(values, dtype=np.float64).reshape(-1))
        return cls(np.sort(array)[::-1])

    @classmethod
    def ones(cls, n: int) -> Spectrum:
        return cls(np.ones(n))

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def shape(self) -> tuple:
        """Shape of the diagonal matrix this spectrum represents."""
        return (len(self._values), len(self._values))

    def __len__(self) -> int:
        return len(self._values)

    def __getitem__(self, index):
        return self._values[index]

    def __iter__(self):
        return iter(self._values)

    def __eq__(self, other) -> bool:
        return isinstance(other, Spectrum) and np.array_equal(self._values, other._values)

    def norm(self) -> float:
        """Spectral norm (largest value), 0 for empty."""
        return float(self._values[0]) if len(self._values) else 0.0

    def sigma(self, i: int) -> float:
        """1-based singular value sigma_i; 0 beyond the stored length."""
        return float(self._values[i - 1]) if 1 <= i <= len(self._values) else 0.0

    def tail(self, k: int) -> Spectrum:
        """sigma_{k+1}, sigma_{k+2}, ... as a new spectrum."""
        return Spectrum(self._values[k:])

    def tail_frobenius(self, k: int) -> float:
        """sqrt(sum_{i>k} sigma_i^2)."""
        return float(np.sqrt(np.sum(self._values[k:] ** 2)))

    def as_diagonal(self) -> np.ndarray:
        return np.diag(self._values)

    def to_list(self) -> list:
        return self._values.tolist()

    def __repr__(self) -> str:
        head = ", ".join(f"{v:.4g}" for v in self._values[:6])
        more = ", ..." if len(self._values) > 6 else ""
        return f"Spectrum([{head}{more}], n={len(self._values)})"
