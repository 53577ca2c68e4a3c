"""Exact symbolic toolkit for bi-Hamiltonian structures of KdV type."""

__version__ = "0.1.0"
