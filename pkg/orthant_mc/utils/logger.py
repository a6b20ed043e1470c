"""
Logging configuration using Loguru
"""
import sys
from pathlib import Path

from loguru import logger

from orthant_mc.config import settings

# Remove default handler
logger.remove()

# Console handler on stderr; stdout is reserved for JSON reports
logger.add(
    sys.stderr,
    format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{extra[name]}</cyan>:<cyan>{function}</cyan> | <level>{message}</level>",
    level=settings.LOG_LEVEL,
    colorize=True,
)

if settings.LOG_DIR:
    LOGS_DIR = Path(settings.LOG_DIR)
    LOGS_DIR.mkdir(parents=True, exist_ok=True)

    # All logs
    logger.add(
        LOGS_DIR / "orthant_mc_{time:YYYY-MM-DD}.log",
        rotation="00:00",
        retention="30 days",
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {extra[name]}:{function} | {message}",
        level="DEBUG",
    )

    # Errors only
    logger.add(
        LOGS_DIR / "errors_{time:YYYY-MM-DD}.log",
        rotation="00:00",
        retention="90 days",
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {extra[name]}:{function}:{line} | {message}",
        level="ERROR",
    )

logger.configure(extra={"name": "orthant_mc"})


def get_logger(name: str):
    """Get a logger instance with the specified name"""
    return logger.bind(name=name)


# Export logger
__all__ = ["logger", "get_logger"]
