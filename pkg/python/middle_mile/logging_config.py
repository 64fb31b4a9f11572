"""
Logging configuration for the planner.

Rich console output on stderr, plus an optional rotating debug file
for long batch runs.
"""

import functools
import sys
from typing import Optional

from loguru import logger
from rich.console import Console
from rich.logging import RichHandler

# stderr keeps stdout free for reports
console = Console(stderr=True)

FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level} | {module}:{function}:{line} | {message}"


def setup_logging(level: str = "INFO", log_file: Optional[str] = None):
    """Configure loguru sinks for a CLI run"""

    # Remove default handler
    logger.remove()

    logger.add(
        RichHandler(console=console, rich_tracebacks=True, show_path=False),
        format="{message}",
        level=level,
    )

    if log_file:
        logger.add(
            log_file,
            rotation="10 MB",
            retention="7 days",
            level="DEBUG",
            format=FILE_FORMAT,
        )

    return logger


def log_stage(title: str):
    """Decorator framing a CLI stage with separator lines"""

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger.info("━" * 60)
            logger.info(title)
            logger.info("━" * 60)
            result = func(*args, **kwargs)
            logger.info("━" * 60)
            return result

        return wrapper

    return decorator


def silence():
    """Worker processes only report errors."""
    logger.remove()
    logger.add(sys.stderr, level="ERROR")
