"""Conformally invariant Willmore-type energies of 4-dimensional submanifolds."""

__version__ = "0.1.0"
