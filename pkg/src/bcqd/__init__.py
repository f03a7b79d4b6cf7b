"""Boundary-corrected kernel quantile density estimation with uniform confidence bands."""

__version__ = "0.1.0"
