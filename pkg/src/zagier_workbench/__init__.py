"""Numerical workbench for Zagier L-series, closed-geodesic sums and their averages."""

__version__ = "0.1.0"
