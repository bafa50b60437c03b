"""Gaussian random matrices with a two-level external source."""

__version__ = '0.1.0'
