"""Exact and numeric verification of Manin quasi-triples and quasi-Poisson geometry."""

__version__ = "0.1.0"
