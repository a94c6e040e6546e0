"""Numerical coorbit-space toolkit for the reduced Heisenberg and affine groups."""

__version__ = "0.1.0"
