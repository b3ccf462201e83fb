"""Exact simulation and analysis of two neutrons entangled by sequential
scattering from a ferromagnetic spin sample."""

__version__ = "0.1.0"
