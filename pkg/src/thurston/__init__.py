"""Thurston-metric envelope geometry at desk scale."""

__version__ = "0.1.0"
