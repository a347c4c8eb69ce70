"""Segment clipping against half-planes in the (sX, sY) payoff plane."""
from __future__ import annotations

import numpy as np

_EPS = 1e-12


def clip_segment(p0, p1, halfplanes, tol=_EPS):
    """Clip the segment ``p0 -> p1`` to ``{x : a . x + b >= 0}`` for every ``(a, b)``.

    Parametric (Liang-Barsky) clipping.  Returns the surviving parameter
    interval ``(t_lo, t_hi)`` within [0, 1], or None when nothing survives.
    """
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - p0
    lo, hi = 0.0, 1.0
    for a, b in halfplanes:
        a = np.asarray(a, dtype=float)
        f0 = float(a @ p0 + b)
        df = float(a @ d)
        scale = tol * max(1.0, abs(f0), abs(df))
        if abs(df) <= scale:
            if f0 < -scale:
                return None
            continue
        t = -f0 / df
        if df > 0:
            lo = max(lo, t)
        else:
            hi = min(hi, t)
        if lo > hi + tol:
            return None
    return lo, max(lo, hi)


def point_on(p0, p1, t):
    p0 = np.asarray(p0, dtype=float)
    return p0 + t * (np.asarray(p1, dtype=float) - p0)
