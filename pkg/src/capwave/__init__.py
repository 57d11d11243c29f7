"""Spectral solver and verification lab for capillary water waves on a periodic box."""

__version__ = "0.1.0"

__all__ = ["__version__"]
