"""Numerics for the alpha-Wiener bridge: Bessel zeros, KL expansions,
path simulation and the law of the squared L^2 norm."""

from __future__ import annotations

__version__ = "0.1.0"

from .bridge import BridgeParams, PathSample, TimeGrid  # noqa: E402
from .normsq import NormSqDistribution  # noqa: E402

__all__ = ["BridgeParams", "NormSqDistribution", "PathSample", "TimeGrid", "__version__"]
