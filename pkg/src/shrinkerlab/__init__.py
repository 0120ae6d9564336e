"""Numerical laboratory for cylindrical self-shrinkers and their Lojasiewicz inequalities."""

__version__ = "0.1.0"
