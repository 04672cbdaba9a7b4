"""Approximation algorithms for geometric intersection graphs."""

__version__ = "0.1.0"
