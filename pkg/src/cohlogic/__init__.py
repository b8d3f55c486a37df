"""Coherent theories: parsing, proof search, translations, Morita extensions, syntactic categories."""

from .report import VERSION as __version__

__all__ = ["__version__"]
