"""Logging configuration for bilinorm.

This module provides:
- Console: human-readable application logs on stderr (stdout carries reports)
- File: app.log with JSON application logs, when a log directory is configured
"""

import logging
import sys
from pathlib import Path
from typing import Optional

import structlog
from structlog.stdlib import LoggerFactory, ProcessorFormatter


def setup_logging(log_level: str = "WARNING", log_dir: Optional[Path] = None) -> None:
    """
    Configure structlog on top of the standard logging module.

    Args:
        log_level: Application log level
        log_dir: Directory for the JSON log file; no file logging if None
    """
    numeric_level = getattr(logging, log_level.upper(), logging.WARNING)

    # ===== Shared Processors =====
    shared_processors = [
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.stdlib.PositionalArgumentsFormatter(),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.processors.UnicodeDecoder(),
    ]

    # ===== Configure Structlog =====
    structlog.configure(
        processors=shared_processors
        + [
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        logger_factory=LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    # ===== Console Handler: stderr =====
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(
        ProcessorFormatter(
            processor=structlog.dev.ConsoleRenderer(colors=False),
            foreign_pre_chain=shared_processors,
        )
    )
    handlers: list[logging.Handler] = [console_handler]

    # ===== File Handler: app.log =====
    if log_dir is not None:
        log_dir.mkdir(parents=True, exist_ok=True)
        app_file_handler = logging.FileHandler(log_dir / "app.log")
        app_file_handler.setLevel(numeric_level)
        app_file_handler.setFormatter(
            ProcessorFormatter(
                processors=[
                    structlog.processors.TimeStamper(fmt="iso"),
                    ProcessorFormatter.remove_processors_meta,
                    structlog.processors.JSONRenderer(),
                ],
                foreign_pre_chain=shared_processors,
            )
        )
        handlers.append(app_file_handler)

    # ===== Configure Root Logger =====
    root_logger = logging.getLogger()
    root_logger.handlers = handlers
    root_logger.setLevel(numeric_level)
