"""Locally split values of polynomials over Q: instance models, checkers and searches."""

__version__ = "0.4.0"
