"""Seeded random streams.

A :class:`RngStream` wraps a PCG64 ``numpy.random.Generator`` and counts how many
scalars it has handed out. Independent streams for trials / grid points are derived
with :func:`derive_seed`, which is a pure function of the base seed and the indices,
so a parallel schedule can never change a result.
"""
from typing import Tuple

import numpy as np

# spawn-key namespaces for dedicated sub-streams
POWER_ITERATION_KEY = 0x5057  # "PW"
TEST_MATRIX_KEY = 0x4754  # "GT"

SEED_MASK = (1 << 64) - 1


def derive_seed(base_seed: int, *indices: int) -> int:
    """64-bit seed for the sub-stream ``indices`` of ``base_seed``."""
    sequence = np.random.SeedSequence(entropy=int(base_seed) & SEED_MASK, spawn_key=tuple(int(i) for i in indices))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


class RngStream:
    """Deterministic scalar stream with a draw counter."""

    def __init__(self, seed: int):
        self.seed = int(seed) & SEED_MASK
        self.position = 0
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def standard_normal(self, shape: Tuple[int, ...]) -> np.ndarray:
        """i.i.d. N(0, 1) float64 array; advances position by its size."""
        values = self._generator.standard_normal(size=shape, dtype=np.float64)
        self.position += int(values.size)
        return values

    def chi(self, dof: np.ndarray) -> np.ndarray:
        """Chi-distributed draws, one per entry of ``dof`` (each > 0)."""
        dof = np.asarray(dof, dtype=np.float64)
        values = np.sqrt(self._generator.chisquare(dof))
        self.position += int(values.size)
        return values

    def spawn(self, *indices: int) -> "RngStream":
        """Fresh independent stream for a sub-task."""
        return RngStream(derive_seed(self.seed, *indices))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, position={self.position})"
