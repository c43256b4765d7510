"""Exact Hecke algebra, Soergel module and Hodge theory verification toolkit."""

__version__ = "0.1.0"
