"""Logging helpers shared by every component of the engine."""

from debug.logger import setup_logger, log_action

__all__ = ["setup_logger", "log_action"]
