"""
logger_config.py
-----------------
Logging setup for the preserver toolkit. All modules log through children of
the ``preservers`` logger; `setup_logger` attaches a colorized console handler
(and, when a log file is named, a rotating file handler) to that parent once.

The library never calls `setup_logger` on import, so embedding applications
keep control of their handlers. The CLI calls it at startup.

Author: infoyouth
Date: 2026-10-18
"""

import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Optional

import colorlog

APP_LOGGER_NAME = "preservers"

LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING")
LOG_FILE = os.getenv("LOG_FILE", "")
LOG_FILE_SIZE = max(int(os.getenv("LOG_FILE_SIZE", "10485760")), 1)
LOG_BACKUP_COUNT = max(int(os.getenv("LOG_BACKUP_COUNT", "5")), 1)


def setup_logger(
    log_level: Optional[str] = None,
    log_file: Optional[str] = None,
    log_file_size: int = LOG_FILE_SIZE,
    log_backup_count: int = LOG_BACKUP_COUNT,
) -> logging.Logger:
    """
    Configure and return the application logger.

    Args:
        log_level (str): Logging level (e.g., DEBUG, INFO). Falls back to the
            ``LOG_LEVEL`` environment variable.
        log_file (str): Path of a rotating log file; empty disables it.
            Falls back to ``LOG_FILE``.
        log_file_size (int): Maximum size of the log file in bytes.
        log_backup_count (int): Number of backup log files to keep.

    Returns:
        logging.Logger: The ``preservers`` logger.
    """
    log = logging.getLogger(APP_LOGGER_NAME)
    level = (log_level or LOG_LEVEL).upper()
    log.setLevel(level)

    if not log.handlers:
        formatter = colorlog.ColoredFormatter(
            fmt=(
                "%(asctime)s - "
                "%(log_color)s%(levelname)-8s%(reset)s - "
                "%(filename)s - "
                "%(message)s (Line: %(lineno)d)"
            ),
            datefmt="%Y-%m-%d %H:%M:%S",
            log_colors={
                "DEBUG": "cyan",
                "INFO": "green",
                "WARNING": "yellow",
                "ERROR": "red",
                "CRITICAL": "bold_red",
            },
        )
        stream_handler = logging.StreamHandler()
        stream_handler.setFormatter(formatter)
        log.addHandler(stream_handler)

        target = LOG_FILE if log_file is None else log_file
        if target:
            file_handler = RotatingFileHandler(
                target, maxBytes=log_file_size, backupCount=log_backup_count
            )
            file_handler.setFormatter(formatter)
            log.addHandler(file_handler)

        log.propagate = False

    return log


def get_logger(name: str = __name__) -> logging.Logger:
    """Get a child of the application logger for module ``name``."""
    if name == APP_LOGGER_NAME or name.startswith(APP_LOGGER_NAME + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{APP_LOGGER_NAME}.{name}")
