"""Numerical laboratory for higher-order interference and its local completions."""

__version__ = "0.1.0"
