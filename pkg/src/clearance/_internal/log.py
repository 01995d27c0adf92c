from __future__ import annotations

import logging
import sys
from typing import Any

import structlog

from . import API


@API.private
def get_logger(name: str) -> Any:
    return structlog.get_logger(name)


@API.private
def short_hex(data: bytes, length: int = 8) -> str:
    """ Prefix of a token or nonce, enough to correlate log lines, never a full secret. """
    return data.hex()[:length]


@API.private
def configure_logging(verbosity: int = 0, *, json: bool = False) -> None:
    """
    Structured logs go to stderr so that command output on stdout stays parseable.
    """
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    renderer: Any = (structlog.processors.JSONRenderer(sort_keys=True) if json
                     else structlog.dev.ConsoleRenderer(colors=False))
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(sys.stderr),
        cache_logger_on_first_use=False,
    )
