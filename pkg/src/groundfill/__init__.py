"""Grounded, citation-first form completion for heterogeneous portals."""

__version__ = "0.1.0"
