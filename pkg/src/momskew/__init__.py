"""Skewness analytics for linear and nonlinear momentum strategies."""

__version__ = "0.1.0"
