"""
Logging setup.

Logs go to stderr so that stdout only ever carries command results.
"""

import logging
import sys
from typing import Optional

try:
    from pythonjsonlogger.json import JsonFormatter
except ImportError:  # python-json-logger < 3
    from pythonjsonlogger.jsonlogger import JsonFormatter

from .config import Config
from .errors import DomainError

_TEXT_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
_JSON_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"
_FORMATS = ('json', 'text')


def setup_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> logging.Logger:
    """
    Install a single stderr handler on the root logger.

    Args:
        level: Log level name, defaults to Config.LOG_LEVEL
        fmt: 'json' or 'text', defaults to Config.LOG_FORMAT

    Returns:
        The configured root logger

    Raises:
        DomainError: Unknown level name or format
    """
    level = (level or Config.LOG_LEVEL).upper()
    fmt = (fmt or Config.LOG_FORMAT).lower()
    if not isinstance(logging.getLevelName(level), int):
        raise DomainError(f"unknown log level '{level}'")
    if fmt not in _FORMATS:
        raise DomainError(f"log format must be one of {', '.join(_FORMATS)}, got '{fmt}'")

    handler = logging.StreamHandler(sys.stderr)
    if fmt == 'json':
        handler.setFormatter(JsonFormatter(_JSON_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(_TEXT_FORMAT))

    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(level)
    return root
