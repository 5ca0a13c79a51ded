"""Environment-driven settings.

Values come from ``SKETCHBOUND_*`` variables, optionally loaded from a local
``.env`` file.
"""
import os
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    """Runtime knobs shared by the library and the CLI."""

    model_config = SettingsConfigDict(env_prefix="SKETCHBOUND_", extra="ignore")

    threads: Optional[int] = Field(default=None, ge=1)
    log_level: str = "INFO"
    output_dir: str = "results"
    # Largest min(m, n) handled with dense SVD / dense residuals
    dense_limit: int = Field(default=4000, ge=1)

    @property
    def worker_count(self) -> int:
        """Work pool size: SKETCHBOUND_THREADS or the CPU count."""
        return self.threads or os.cpu_count() or 1


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return the process-wide settings (cached)."""
    return Settings()
