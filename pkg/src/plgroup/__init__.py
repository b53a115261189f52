"""Exact computations with piecewise-linear pseudo-groups on 1-manifolds."""

__version__ = "0.1.0"
