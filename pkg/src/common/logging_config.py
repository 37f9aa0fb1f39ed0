"""
Centralized logging configuration for orbit-bounds.

Reports go to stdout, so every log record goes to stderr or to an optional
rotating log file. Configuration follows the arguments first and the
``LOG_LEVEL``, ``LOG_FILE`` and ``LOG_FORMAT`` environment variables second.
"""

import logging
import logging.handlers
import os
import sys
from pathlib import Path

STANDARD_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
JSON_FORMAT = (
    '{"timestamp": "%(asctime)s", "level": "%(levelname)s", '
    '"module": "%(name)s", "message": "%(message)s"}'
)


def setup_logging(
    log_level: str | None = None,
    log_file: str | None = None,
    log_format: str | None = None,
    enable_file_logging: bool | None = None,
) -> None:
    """
    Configure the root logger with a stderr handler and an optional file handler.

    Args:
        log_level: Logging level name. Defaults to ``LOG_LEVEL`` or WARNING.
        log_file: Path to the log file. Defaults to ``LOG_FILE``.
        log_format: ``standard`` or ``json``. Defaults to ``LOG_FORMAT`` or
            ``standard``.
        enable_file_logging: Whether to add the rotating file handler.
            Defaults to whether a log file is configured at all.

    Example:
        >>> setup_logging(log_level="DEBUG")
        >>> logging.getLogger(__name__).debug("p=3: block depths (2,)")
    """
    log_level = (log_level or os.getenv("LOG_LEVEL", "WARNING")).upper()
    log_file = log_file or os.getenv("LOG_FILE")
    log_format = (log_format or os.getenv("LOG_FORMAT", "standard")).lower()
    if enable_file_logging is None:
        enable_file_logging = bool(log_file)

    numeric_level = getattr(logging, log_level, logging.WARNING)

    root_logger = logging.getLogger()
    root_logger.setLevel(numeric_level)
    root_logger.handlers.clear()

    if log_format == "json":
        formatter = logging.Formatter(JSON_FORMAT, datefmt="%Y-%m-%dT%H:%M:%S%z")
    else:
        formatter = logging.Formatter(STANDARD_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if enable_file_logging and log_file:
        try:
            Path(log_file).parent.mkdir(parents=True, exist_ok=True)
            # 10 MB per file, 5 backups
            file_handler = logging.handlers.RotatingFileHandler(
                log_file,
                maxBytes=10 * 1024 * 1024,
                backupCount=5,
                encoding="utf-8",
            )
            file_handler.setLevel(numeric_level)
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)
            root_logger.info("File logging enabled: %s", log_file)
        except OSError as e:
            root_logger.warning("Failed to set up file logging: %s", e)

    root_logger.debug("Logging configured: level=%s, format=%s", log_level, log_format)