"""Perturbative product-formula decomposition for the periodic Ising chain."""

__version__ = "0.1.0"
