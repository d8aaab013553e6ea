"""Freeze-tag toolkit: wake-up strategies for robot swarms in the unit disk,
the l1 ball of R^3 and on the sphere, an exact solver, and a schedule verifier."""

__version__ = "0.1.0"
