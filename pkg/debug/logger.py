"""
Logger setup for the forking-paths engine.

Every component asks for its logger by name; log files land in
``debug/logs/<name>.log`` unless ``FORKPATHS_LOG_DIR`` points elsewhere.
"""

import os
import sys
import logging
from logging.handlers import RotatingFileHandler
from typing import Optional

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DEFAULT_LOG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "logs")
MAX_LOG_BYTES = 5 * 1024 * 1024
BACKUP_COUNT = 3


def _log_dir() -> str:
    return os.environ.get("FORKPATHS_LOG_DIR", DEFAULT_LOG_DIR)


def setup_logger(name: str, debug_mode: bool = False) -> logging.Logger:
    """Create (or fetch) a named logger writing to file and stderr

    Args:
        name: Logger name, also used as the log file stem
        debug_mode: Log at DEBUG level instead of INFO

    Returns:
        The configured logger
    """
    logger = logging.getLogger(name)
    env_level = os.environ.get("FORKPATHS_LOG_LEVEL", "").upper()
    if debug_mode or env_level == "DEBUG":
        level = logging.DEBUG
    elif env_level in ("WARNING", "ERROR", "CRITICAL"):
        level = getattr(logging, env_level)
    else:
        level = logging.INFO
    logger.setLevel(level)

    if getattr(logger, "_forkpaths_configured", False):
        return logger

    formatter = logging.Formatter(LOG_FORMAT)

    try:
        log_dir = _log_dir()
        os.makedirs(log_dir, exist_ok=True)
        file_handler = RotatingFileHandler(
            os.path.join(log_dir, f"{name}.log"),
            maxBytes=MAX_LOG_BYTES,
            backupCount=BACKUP_COUNT,
            encoding="utf-8",
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    except OSError as e:
        # Read-only checkouts still get console output
        sys.stderr.write(f"Could not open log file for {name}: {str(e)}\n")

    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(formatter)
    stream_handler.setLevel(logging.WARNING)
    logger.addHandler(stream_handler)

    logger.propagate = False
    logger._forkpaths_configured = True
    return logger


def log_action(logger: Optional[logging.Logger], action: str, details: Optional[str] = None) -> None:
    """Log a user-visible milestone

    Args:
        logger: Logger to write to (ignored when None)
        action: Short description of what happened
        details: Optional extra context appended after a separator
    """
    if logger is None:
        return
    if details:
        logger.info(f"{action} | {details}")
    else:
        logger.info(action)
