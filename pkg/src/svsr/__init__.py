"""Sudden vanishing and reappearance of nonclassicality witnesses in truncated Fock spaces."""

__version__ = "0.1.0"
