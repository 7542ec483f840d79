"""Services module."""

from .config_loader import dump_config, load_config_file, parse_config, split_override
from .files import ResultFiles

__all__ = ["dump_config", "load_config_file", "parse_config", "split_override", "ResultFiles"]
