"""Geographic annotation pipeline for social-media flood corpora."""

__version__ = "0.1.0"
