"""Commutator sets, automorphisms and width computations for small finite groups."""

__version__ = "0.1.0"
