"""Numerical laboratory for harmonic maps, Jacobi fields and isotropy
differentials on the 2-sphere."""

__version__ = "0.1.0"
