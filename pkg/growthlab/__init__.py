"""Numerical laboratory for growth of entire functions in C^m."""

__version__ = "0.1.0"
