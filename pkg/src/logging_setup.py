"""Logging setup for the command-line entry point.

Library modules only create `logging.getLogger(__name__)`; this is the one
place handlers are attached.
"""

import os
import logging
from typing import Optional

import logfire

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s'


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """Configure the root logger from `PDMP_LOG_LEVEL` / `PDMP_LOG_PATH`.

    When `LOGFIRE_TOKEN` is set, records are also forwarded to Logfire.
    Safe to call more than once.
    """
    level_name = (level or os.getenv("PDMP_LOG_LEVEL", "INFO")).upper()
    log_path = os.getenv("PDMP_LOG_PATH")

    root = logging.getLogger()
    root.setLevel(getattr(logging, level_name, logging.INFO))

    if not getattr(root, "_pdmp_configured", False):
        formatter = logging.Formatter(LOG_FORMAT)

        console = logging.StreamHandler()
        console.setFormatter(formatter)
        root.addHandler(console)

        if log_path:
            handler = logging.FileHandler(log_path, mode='a')
            handler.setFormatter(formatter)
            root.addHandler(handler)

        if os.getenv("LOGFIRE_TOKEN"):
            logfire.configure(send_to_logfire="if-token-present", console=False)
            root.addHandler(logfire.LogfireLoggingHandler())

        root._pdmp_configured = True

    return logging.getLogger("pdmp")
