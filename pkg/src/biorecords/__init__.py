"""Digitize scanned biographical registers into linked person records."""

__version__ = "0.1.0"
