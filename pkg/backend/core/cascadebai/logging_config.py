# backend/core/cascadebai/logging_config.py
# ------------------------------------------------------------
# Standard logging setup shared by the CLI and the test suite.
# Library modules only call logging.getLogger(__name__); the
# handler is installed once here.
# ------------------------------------------------------------

from __future__ import annotations

import logging

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_HANDLER_NAME = "cascadebai-stream"


def configure_logging(level: str | int = "INFO") -> logging.Logger:
    """
    Attach one stream handler to the package logger (idempotent).
    Returns the package logger so callers can tweak it further.
    """
    logger = logging.getLogger("cascadebai")
    logger.setLevel(level if isinstance(level, int) else str(level).upper())

    if not any(getattr(h, "name", None) == _HANDLER_NAME for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.set_name(_HANDLER_NAME)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)

    return logger
