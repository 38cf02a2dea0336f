"""Singular-value cooperative jamming detection."""

__version__ = "0.1.0"
