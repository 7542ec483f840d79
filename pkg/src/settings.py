"""Environment configuration.

Loads `.env` from the repository root (next to `pdmp_cli.py`) before any value
is read.
"""

import os
import logging
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

BASE_DIR = Path(__file__).parent.parent
ENV_PATH = BASE_DIR / ".env"

load_dotenv(dotenv_path=ENV_PATH)

logger = logging.getLogger(__name__)


def worker_cap() -> Optional[int]:
    """Maximum worker count from `PDMP_THREADS`, or None when unset."""
    raw = os.getenv("PDMP_THREADS")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer PDMP_THREADS={raw!r}")
        return None
    if value < 1:
        logger.warning(f"Ignoring PDMP_THREADS={value}; must be >= 1")
        return None
    return value


def resolve_workers(requested: Optional[int] = None) -> int:
    """Number of joblib workers: the request (or all cores) capped by PDMP_THREADS."""
    n = requested if requested and requested > 0 else (os.cpu_count() or 1)
    cap = worker_cap()
    if cap is not None:
        n = min(n, cap)
    return max(1, n)
