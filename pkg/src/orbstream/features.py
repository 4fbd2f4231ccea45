"""Feature point record shared by the batch and streaming paths."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class FeaturePoint:
    """A detected corner with its raw moments and the orientation in use."""

    level: int
    x: int
    y: int
    m10: int
    m01: int
    sin: float
    cos: float
