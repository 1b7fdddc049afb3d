"""Projection constants, Ky Fan maximization over sign matrices, and the
finite-dimensional duality checks around them."""

__version__ = "0.1.0"
