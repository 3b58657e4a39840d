"""Simulation and analysis of n-photon indistinguishability distillation."""

from . import distill, evolve, fock, patterns, unitary

__all__ = ["distill", "evolve", "fock", "patterns", "unitary"]
__version__ = "0.1.0"
