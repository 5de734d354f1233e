"""Numerical experiments on moments of the zeta function and quadratic twists."""

__version__ = "0.1.0"
