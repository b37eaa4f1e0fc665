"""Stochastic routing with on-time arrival reliability."""

from ._core import Engine, SpotarError, convolve, verify

__all__ = ["Engine", "SpotarError", "convolve", "verify"]
