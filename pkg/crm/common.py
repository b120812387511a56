"""
This file defines the logger shared by every module of the package.
Handlers come from settings.LOGGERS, so you will rarely need to edit this file.
"""

import logging
import sys
from typing import Iterable, Optional

from rich.console import Console
from rich.logging import RichHandler

from . import settings

# #######################################################
# implement custom loggers from settings.LOGGERS
# #######################################################
logger = logging.getLogger(settings.APP_NAME)

formatter = logging.Formatter(
    "%(asctime)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s"
)


def configure_logger(
    loggers: Optional[Iterable[str]] = None, level: Optional[str] = None
) -> logging.Logger:
    """
    (Re)build the handlers of the package logger.

    Args:
        loggers: "level:target" entries, defaults to settings.LOGGERS
        level: optional level overriding every entry (e.g. from --log-level)

    Returns:
        logging.Logger: the configured package logger
    """
    # Remove all existing handlers to prevent duplicates
    if logger.hasHandlers():
        logger.handlers.clear()
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    handlers_added = set()
    for item in loggers if loggers is not None else settings.LOGGERS:
        item_level, target = item.split(":", 1)
        if level is not None:
            item_level = level
        handler_key = f"{item_level}:{target}"
        if handler_key in handlers_added:
            continue

        if target in ("stdout", "stderr"):
            stream = getattr(sys, target)
            if stream.isatty():
                handler = RichHandler(
                    console=Console(file=stream), rich_tracebacks=True
                )
            else:
                handler = logging.StreamHandler(stream)
                handler.setFormatter(formatter)
        else:
            handler = logging.FileHandler(target)
            handler.setFormatter(formatter)
        handler.setLevel(getattr(logging, item_level.upper(), logging.DEBUG))
        logger.addHandler(handler)
        handlers_added.add(handler_key)
    return logger


configure_logger()
