"""Downlink statistics for multi-beam LEO satellites under shadowed Rician fading."""

__version__ = "0.1.0"
