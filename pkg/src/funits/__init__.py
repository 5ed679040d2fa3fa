"""Functional-unit identification from motion trajectories."""

__version__ = "0.1.0"
