"""
Logging for fraclap.

One "fraclap" logger owns the handlers: colour on stderr (stdout is reserved
for reports) and an optional rotating file. Modules log through children,
get_logger(__name__) -> "fraclap.<module>", so the record names say which
layer spoke.
"""

import logging
import logging.handlers
from pathlib import Path
from typing import Optional
import colorlog

LOGGER_NAME = "fraclap"
DEFAULT_LOG_FILE = "data/logs/fraclap.log"
BANNER_WIDTH = 60

LOG_COLORS = {
    'DEBUG': 'cyan',
    'INFO': 'green',
    'WARNING': 'yellow',
    'ERROR': 'red',
    'CRITICAL': 'red,bg_white',
}


def setup_logger(
    level: str = "INFO",
    log_to_file: bool = True,
    log_file: Optional[str] = None,
    name: str = LOGGER_NAME,
) -> logging.Logger:
    """
    Configure the package logger.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_to_file: Also write to a rotating log file
        log_file: Path to log file (defaults to data/logs/fraclap.log)
        name: Logger to configure

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, str(level).upper()))

    # Repeated setup (tests, several main() calls) must not stack handlers
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    console_handler = colorlog.StreamHandler()
    console_handler.setLevel(logging.DEBUG)
    console_handler.setFormatter(colorlog.ColoredFormatter(
        "%(log_color)s%(levelname)-8s%(reset)s %(blue)s%(name)s%(reset)s: %(message)s",
        reset=True,
        log_colors=LOG_COLORS,
    ))
    logger.addHandler(console_handler)

    if log_to_file:
        log_path = Path(log_file or DEFAULT_LOG_FILE)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        # max 10MB, keep 5 backups
        file_handler = logging.handlers.RotatingFileHandler(
            log_path,
            maxBytes=10 * 1024 * 1024,
            backupCount=5,
            encoding='utf-8'
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        logger.addHandler(file_handler)

    return logger


def get_logger(module: Optional[str] = None) -> logging.Logger:
    """
    Package logger, or the child for a module.

    Args:
        module: Dotted module name (usually __name__); only the last part is kept

    Returns:
        "fraclap" or "fraclap.<last part>"
    """
    if not module:
        return logging.getLogger(LOGGER_NAME)
    return logging.getLogger(f"{LOGGER_NAME}.{module.rsplit('.', 1)[-1]}")


def log_banner(logger: logging.Logger, title: str, leading_blank: bool = False) -> None:
    """Log a title between two rules."""
    rule = "=" * BANNER_WIDTH
    logger.info(("\n" if leading_blank else "") + rule)
    logger.info(title)
    logger.info(rule)
