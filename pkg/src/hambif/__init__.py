"""Bifurcation analysis of Hamiltonian boundary value problems on discretised flows."""
__version__ = "0.1.0"
