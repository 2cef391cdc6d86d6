"""Fluctuation lab for the LCS of random binary strings."""

__version__ = "0.1.0"
