"""Logging setup: one RichHandler on the ``sketchbound`` logger tree."""
import logging
from typing import Optional

from rich.logging import RichHandler

from sketchbound.utils.settings import get_settings

LOGGER_NAME = "sketchbound"

_configured = False


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """Attach a RichHandler to the package logger (idempotent)."""
    global _configured
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel((level or get_settings().log_level).upper())
    if not _configured:
        handler = RichHandler(show_path=False, markup=False, rich_tracebacks=True)
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
        logger.propagate = False
        _configured = True
    return logger


def get_logger(name: str) -> logging.Logger:
    """Child logger, e.g. ``get_logger(__name__)`` inside the package."""
    if not name.startswith(LOGGER_NAME):
        name = f"{LOGGER_NAME}.{name}"
    return logging.getLogger(name)
