"""
Logging Utility Module

This module provides a centralized logging configuration for the application.
Console output is colorized with colorlog when attached to a terminal.
"""

import logging
import sys
from typing import Optional

import colorlog

DEFAULT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

_LOG_COLORS = {
    'DEBUG': 'cyan',
    'INFO': 'green',
    'WARNING': 'yellow',
    'ERROR': 'red',
    'CRITICAL': 'bold_red',
}


def _console_formatter(fmt: str) -> logging.Formatter:
    """Build a colored formatter for TTYs and a plain one otherwise."""
    if sys.stderr.isatty():
        return colorlog.ColoredFormatter(
            fmt='%(log_color)s' + fmt,
            datefmt=DATE_FORMAT,
            log_colors=_LOG_COLORS
        )
    return logging.Formatter(fmt=fmt, datefmt=DATE_FORMAT)


def get_logger(
    name: str,
    level: Optional[int] = None,
    log_file: Optional[str] = None
) -> logging.Logger:
    """
    Get or create a logger with standardized configuration.

    Loggers without an explicit level or file defer to the root logger,
    so ``configure_logging`` controls the whole package.

    Args:
        name: Name of the logger (typically __name__ from calling module)
        level: Optional level pinned on this logger
        log_file: Optional file path for file logging

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    # Avoid adding handlers multiple times
    if logger.handlers:
        return logger

    if level is not None:
        logger.setLevel(level)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(logging.Formatter(DEFAULT_FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(file_handler)

    return logger


def configure_logging(
    level: int = logging.INFO,
    log_file: Optional[str] = None,
    format: Optional[str] = None
) -> None:
    """
    Configure global logging settings for the entire application.

    Args:
        level: Global logging level
        log_file: Optional file path for logging
        format: Optional custom format string
    """
    if format is None:
        format = DEFAULT_FORMAT

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(_console_formatter(format))

    logging.basicConfig(
        level=level,
        handlers=[console_handler],
        force=True
    )

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(logging.Formatter(format, datefmt=DATE_FORMAT))
        logging.getLogger().addHandler(file_handler)
