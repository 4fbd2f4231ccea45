"""Shared numeric helpers."""

from __future__ import annotations

import numpy as np


def round_half_away(values):
    """Round to nearest integer with ties going away from zero.

    Works on scalars and arrays; returns the same kind of object with a
    float dtype (callers cast as needed).
    """
    v = np.asarray(values, dtype=np.float64)
    out = np.trunc(v + np.copysign(0.5, v))
    if np.isscalar(values) or getattr(values, "ndim", 1) == 0:
        return float(out)
    return out
