"""Adaptive probabilistic safety certificates for stochastic lane keeping."""

__version__ = "0.1.0"
