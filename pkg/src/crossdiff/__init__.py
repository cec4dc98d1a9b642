"""Finite-volume simulation and closed-form states of a two-species
cross-diffusion system with non-local self- and cross-interactions."""

__version__ = "0.1.0"
