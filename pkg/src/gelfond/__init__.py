"""Digit sums along cubes: kernels, correlation sums and parameter audits."""

__version__ = "0.1.0"
