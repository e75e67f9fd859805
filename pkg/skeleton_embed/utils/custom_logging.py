"""
Structured JSON logging. Named custom_logging to avoid shadowing the
standard library logging module.
"""

import logging
import sys
from typing import Union

from pythonjsonlogger.json import JsonFormatter

__all__ = ["setup_logging"]


def setup_logging(level: Union[int, str] = logging.INFO) -> None:
    """
    Configures structured JSON logging on stderr so stdout stays free for
    command results.
    """
    handler = logging.StreamHandler(sys.stderr)

    fmt = "%(asctime)s %(name)s %(levelname)s %(message)s %(module)s %(lineno)d"
    formatter = JsonFormatter(fmt=fmt, datefmt="%Y-%m-%dT%H:%M:%S")

    handler.setFormatter(formatter)

    root_logger = logging.getLogger()
    for h in root_logger.handlers[:]:
        root_logger.removeHandler(h)

    root_logger.addHandler(handler)
    root_logger.setLevel(level)

    for name in ("shapely", "matplotlib"):
        logging.getLogger(name).setLevel(logging.WARNING)
