"""Hausdorff dimension of bounded-type limit sets for cusped Fuchsian groups."""

__version__ = "0.1.0"
