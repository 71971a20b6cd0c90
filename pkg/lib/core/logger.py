import logging
import os
from logging import handlers
from pathlib import Path
from typing import Any

import numpy as np
import structlog
from structlog.typing import EventDict
from structlog.typing import WrappedLogger

from lib.core.text_processor import sanitize_text

LOG_ROTATE_WHEN = os.getenv(key="LOG_ROTATE_WHEN", default="W6")
LOG_ROTATE_BACKUP = int(os.getenv(key="LOG_ROTATE_BACKUP", default="4"))
LOG_LEVEL = os.getenv(key="LOG_LEVEL", default="INFO").upper()
LOG_DIR = os.getenv(key="LOG_DIR", default="logs")

# Arrays longer than this are logged by shape only
MAX_LOGGED_ARRAY = 16


def _to_builtin(value: Any) -> Any:
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        if value.size > MAX_LOGGED_ARRAY:
            return {"shape": list(value.shape), "dtype": str(value.dtype)}
        return [_to_builtin(item) for item in value.ravel()]
    if isinstance(value, (list, tuple)):
        return [_to_builtin(item) for item in value]
    return value


def numpy_to_builtin(
    _logger: WrappedLogger,
    _method: str,
    event_dict: EventDict,
) -> EventDict:
    """
    Convert numpy scalars, complex numbers and arrays in the event to
    values the JSON renderer accepts.
    """
    return {key: _to_builtin(value) for key, value in event_dict.items()}


def initialize_logger(logger_name: str) -> None:
    """
    Initialize the process logger

    Log records are JSON lines written to ``<LOG_DIR>/<logger name>.log``.

    Args:
        logger_name: Name of the logger, sanitized into the file name

    Returns:
        None
    """
    logger_name = sanitize_text(logger_name)

    # Rotating file under the log directory
    log_dir = Path(LOG_DIR)
    log_dir.mkdir(parents=True, exist_ok=True)
    file_handler = handlers.TimedRotatingFileHandler(
        filename=log_dir / f"{logger_name}.log",
        when=LOG_ROTATE_WHEN,
        backupCount=LOG_ROTATE_BACKUP,
        encoding="utf-8",
    )
    level = logging.getLevelName(LOG_LEVEL)
    file_handler.setLevel(level)
    logging.basicConfig(
        format="%(message)s",
        level=level,
        handlers=[file_handler],
        force=True,
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            numpy_to_builtin,
            structlog.processors.UnicodeDecoder(),
            structlog.processors.JSONRenderer(),
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )
