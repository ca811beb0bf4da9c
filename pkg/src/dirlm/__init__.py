"""Offline directory brute-forcing simulation with prior-knowledge strategies."""

__version__ = "0.1.0"
