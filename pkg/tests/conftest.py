"""Shared fixtures; puts src/ on sys.path like the root scripts do."""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from sketchbound.core.rng import RngStream  # noqa: E402
from sketchbound.utils.settings import get_settings  # noqa: E402


@pytest.fixture
def rng():
    return RngStream(1234)


@pytest.fixture
def random_matrix(rng):
    def make(rows: int, cols: int) -> np.ndarray:
        return rng.standard_normal((rows, cols))

    return make


@pytest.fixture
def settings_env(monkeypatch):
    """Set SKETCHBOUND_* variables for one test and refresh the cached settings."""

    def apply(**values):
        for key, value in values.items():
            monkeypatch.setenv(f"SKETCHBOUND_{key.upper()}", str(value))
        get_settings.cache_clear()

    yield apply
    get_settings.cache_clear()
