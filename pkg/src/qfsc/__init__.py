"""Numerical workbench for quasifree stochastic calculus on truncated Fock spaces."""

__version__ = "0.1.0"
