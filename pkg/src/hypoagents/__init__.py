"""Iterative multi-agent hypothesis generation over mass-spectrometry presence tables."""

__version__ = "0.1.0"
