"""Directed-equality proof kernel with finite-set semantics."""

__version__ = "0.1.0"
