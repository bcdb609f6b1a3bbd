"""Uncoupling of first-order linear differential systems over Z/pZ(X)."""

__version__ = "0.1.0"
