"""
Logging configuration for the entanglement toolkit
"""
import logging
import sys
from typing import Optional

import colorlog

_LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

sentry_initialized = False


def init_sentry(dsn: Optional[str]) -> bool:
    """
    Enable Sentry error reporting when a DSN is configured

    Args:
        dsn: Sentry DSN, or None/empty to skip

    Returns:
        True if Sentry is active
    """
    global sentry_initialized
    if not dsn or sentry_initialized:
        return sentry_initialized
    try:
        import sentry_sdk
    except ImportError:
        return False
    sentry_sdk.init(dsn=dsn, traces_sample_rate=0.0)
    sentry_initialized = True
    return True


def setup_logger(
    name: Optional[str] = None,
    level: str = 'WARNING',
    log_file: Optional[str] = None
) -> logging.Logger:
    """
    Setup and configure logger

    Console output goes to stderr so stdout stays machine-readable.

    Args:
        name: Logger name (None configures the root logger)
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional log file path

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    numeric_level = getattr(logging, level.upper(), logging.WARNING)
    logger.setLevel(numeric_level)

    # Prevent duplicate handlers
    if logger.handlers:
        for handler in logger.handlers:
            handler.setLevel(numeric_level)
        return logger

    if sys.stderr.isatty():
        console_formatter = colorlog.ColoredFormatter(
            fmt='%(log_color)s' + _LOG_FORMAT,
            datefmt=_DATE_FORMAT
        )
    else:
        console_formatter = logging.Formatter(fmt=_LOG_FORMAT, datefmt=_DATE_FORMAT)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(console_formatter)
    logger.addHandler(console_handler)

    # File handler (if specified)
    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(logging.Formatter(fmt=_LOG_FORMAT, datefmt=_DATE_FORMAT))
        logger.addHandler(file_handler)

    return logger

