"""Logging setup shared by the CLI and the simulation packages."""

import logging

from rich.logging import RichHandler

from src.core.config import app_settings

_CONFIGURED = False


def configure_logging(level: str | None = None) -> None:
    """
    Route the package loggers through a Rich handler.

    Args:
        level: Log level name; defaults to the LOG_LEVEL setting.
    """
    global _CONFIGURED
    root = logging.getLogger('src')
    root.setLevel(level or app_settings.LOG_LEVEL)
    if _CONFIGURED:
        return
    handler = RichHandler(show_path=app_settings.DEBUG, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter('%(name)s: %(message)s'))
    root.addHandler(handler)
    root.propagate = False
    _CONFIGURED = True
