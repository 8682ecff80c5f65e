"""Chordal Loewner chains in the right half-plane and their quasiconformal extensions."""
__version__ = "0.1.0"
