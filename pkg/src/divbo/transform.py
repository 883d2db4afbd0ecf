"""Objective transformation applied before surrogate fitting.

Accuracies below the knee ``1 - alpha`` pass through unchanged; above it
the scale switches to a log stretch so the surrogate keeps resolution in
the top of the range where accuracy differences are small:

    g(y) = y                                   if y < 1 - alpha
    g(y) = 1 - ln(1 - y) + ln(alpha) - alpha   otherwise

The constant ``ln(alpha) - alpha`` makes the two branches meet at the
knee, so g is continuous and strictly increasing on [0, 1).  An accuracy
of exactly 1 is rejected rather than clamped: the log branch diverges
there, and a tabular benchmark reporting a flawless accuracy is degenerate
input we want surfaced, not hidden.
"""

from __future__ import annotations

import math

__all__ = ["hybrid_transform", "minmax_rescale"]


def hybrid_transform(y: float, alpha: float = 0.3) -> float:
    """Transformed objective value for raw accuracy ``y`` in [0, 1)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0.0 <= y < 1.0:
        raise ValueError(f"accuracy must lie in [0, 1), got {y}")
    if y < 1.0 - alpha:
        return y
    return 1.0 - math.log(1.0 - y) + math.log(alpha) - alpha


def minmax_rescale(value: float, lo: float, hi: float) -> float:
    """Map ``value`` from [lo, hi] onto [0, 1].

    Utility for adapting objectives that are not already accuracies
    (e.g. losses) to the transform's domain; the bounds should come from
    the benchmark table, not from the unbounded metric.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got ({lo}, {hi})")
    if not lo <= value <= hi:
        raise ValueError(f"value {value} outside [{lo}, {hi}]")
    return (value - lo) / (hi - lo)
