"""
Logging module for sparsewf.
"""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from typing import Iterator

from termcolor import colored

# Colour per level; INFO stays plain so summaries read like normal output.
_LEVEL_COLORS = {
    logging.DEBUG: "magenta",
    logging.WARNING: "yellow",
    logging.ERROR: "red",
    logging.CRITICAL: "red",
}


class SparseWFLogFormatter(logging.Formatter):
    """
    Colour log messages by level.
    """

    def format(self, record):
        message = record.getMessage()
        color = _LEVEL_COLORS.get(record.levelno)
        if color is None:
            return message
        return colored(message, color, force_color=True)


# Custom logger.
log = logging.getLogger("sparsewf")
log.setLevel(logging.INFO)
handler = logging.StreamHandler()
handler.setFormatter(SparseWFLogFormatter())
log.addHandler(handler)
log_levels = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL,
    "NO_LOG": logging.CRITICAL + 1,
}


def set_log_level(name: str) -> None:
    """
    Set the package log level from one of the names in `log_levels`
    (case-insensitive). Unknown names raise a KeyError listing the choices.
    """
    key = name.upper()
    if key not in log_levels:
        raise KeyError(
            f"Unknown log level '{name}', choose from {', '.join(log_levels)}"
        )
    log.setLevel(log_levels[key])


@contextmanager
def mute_log(level=logging.ERROR):
    """
    Temporarily mute the log, simply works as follows:

    with mute_log():
       ...
    """
    original_level = log.getEffectiveLevel()
    log.setLevel(level)
    try:
        yield
    finally:
        log.setLevel(original_level)


class Stopwatch:
    """
    Wall-clock timer in milliseconds, filled in when a `stopwatch()` block
    exits.
    """

    def __init__(self) -> None:
        self.elapsed_ms: float = 0.0


@contextmanager
def stopwatch(label: str | None = None) -> Iterator[Stopwatch]:
    """
    Time a block; if a label is given the duration is logged at DEBUG level.
    """
    watch = Stopwatch()
    start = time.perf_counter()
    try:
        yield watch
    finally:
        watch.elapsed_ms = (time.perf_counter() - start) * 1000.0
        if label:
            log.debug(f"{label} took {watch.elapsed_ms:.1f} ms")
