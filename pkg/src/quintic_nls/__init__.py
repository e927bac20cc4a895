"""Resonant energy transfer for the quintic NLS on a torus of length L."""

from .lattice import LatticeParams, alpha_index, classify, decompose, multiplier

__version__ = "0.1.0"

__all__ = ["LatticeParams", "alpha_index", "classify", "decompose", "multiplier"]
