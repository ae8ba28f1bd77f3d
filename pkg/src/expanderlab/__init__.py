"""Numerical laboratory for radial expanding self-similar solutions of the
focusing nonlinear heat equation: profile shooting, weighted spectral
analysis, the free similarity-variable semigroup, and the backward-in-time
non-uniqueness demonstration."""

__version__ = "0.1.0"
