"""Boundary geometry, weak Z(q) certification and weighted L2 checks for polynomial domains."""
__version__ = "0.1.0"
