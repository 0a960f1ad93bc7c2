"""Pre-publication scholarly communication engine."""

__version__ = "0.1.0"
