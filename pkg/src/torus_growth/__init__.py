"""Rational growth and almost-convexity experiments for torus-bundle groups."""

__version__ = "0.1.0"
