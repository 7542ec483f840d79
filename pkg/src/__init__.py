"""PDMP simulation and recursive transition-density estimation toolkit."""

__version__ = "1.0.0"
