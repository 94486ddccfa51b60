"""Discrete-time quantum walks of one and two walkers on percolated lines."""

__version__ = "0.1.0"
