"""Depth-based multivariate rank-sum tests and power analysis."""

__version__ = "1.0.0"
