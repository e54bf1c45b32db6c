"""Weighted boundary extrapolation for finite-difference WENO solvers."""

__version__ = "0.1.0"
