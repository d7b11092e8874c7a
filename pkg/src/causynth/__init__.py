"""Causal longitudinal cohort simulation, discovery, fitting and synthesis."""

__version__ = "0.1.0"
