"""Semidefinite lifts of convex semialgebraic sets."""

__version__ = "0.1.0"
