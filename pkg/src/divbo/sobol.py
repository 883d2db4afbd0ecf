"""Deterministic Sobol low-discrepancy sequence in the unit hypercube.

Gray-code construction with embedded direction numbers for up to 21
dimensions.  Index 0 of the sequence is the all-zeros point; callers that
want a usable design usually skip it (``skip=1``, the default of the
samplers built on top of this module).
"""

from __future__ import annotations

import numpy as np

__all__ = ["sobol_points", "max_supported_dim", "UnsupportedDimensionError"]

# Primitive-polynomial degree s, coefficient bits a, and initial direction
# integers m_1..m_s for dimensions 2..21.  Dimension 1 is the all-ones
# special case handled in _direction_integers.
_DIRECTIONS: tuple[tuple[int, int, tuple[int, ...]], ...] = (
    (1, 0, (1,)),
    (2, 1, (1, 3)),
    (3, 1, (1, 3, 1)),
    (3, 2, (1, 1, 1)),
    (4, 1, (1, 1, 3, 3)),
    (4, 4, (1, 3, 5, 13)),
    (5, 2, (1, 1, 5, 5, 17)),
    (5, 4, (1, 1, 5, 5, 5)),
    (5, 7, (1, 1, 7, 11, 19)),
    (5, 11, (1, 1, 5, 1, 1)),
    (5, 13, (1, 1, 1, 3, 11)),
    (5, 14, (1, 3, 5, 5, 31)),
    (6, 1, (1, 3, 3, 9, 7, 49)),
    (6, 13, (1, 1, 1, 15, 21, 21)),
    (6, 16, (1, 3, 1, 13, 27, 49)),
    (6, 19, (1, 1, 1, 15, 7, 5)),
    (6, 22, (1, 3, 1, 15, 13, 25)),
    (6, 25, (1, 1, 5, 5, 19, 61)),
    (7, 1, (1, 3, 7, 11, 23, 15, 103)),
    (7, 4, (1, 3, 7, 13, 13, 15, 69)),
)

_NBITS = 30  # enough for ~1e9 points; matches common reference generators


class UnsupportedDimensionError(ValueError):
    """Requested dimension exceeds the embedded direction-number table."""


def max_supported_dim() -> int:
    """Highest dimension the embedded direction numbers cover."""
    return len(_DIRECTIONS) + 1


def _direction_integers(dim_index: int) -> list[int]:
    """Direction integers v_1..v_NBITS for one dimension (0-based index)."""
    if dim_index == 0:
        return [1 << (_NBITS - k) for k in range(1, _NBITS + 1)]
    s, a, m_init = _DIRECTIONS[dim_index - 1]
    m = list(m_init)
    for k in range(s, _NBITS):
        new = m[k - s] ^ (m[k - s] << s)
        for i in range(1, s):
            if (a >> (s - 1 - i)) & 1:
                new ^= m[k - i] << i
        m.append(new)
    return [m[k] << (_NBITS - (k + 1)) for k in range(_NBITS)]


def sobol_points(d: int, n: int, skip: int = 1) -> np.ndarray:
    """First ``n`` Sobol points in ``[0,1]^d`` starting at index ``skip``.

    Parameters
    ----------
    d : int
        Dimension, 1 <= d <= max_supported_dim().
    n : int
        Number of points to return, n >= 0.
    skip : int
        Index of the first returned point; ``skip=1`` drops the all-zeros
        index-0 point. Must be >= 0.

    Returns
    -------
    ndarray of shape (n, d), dtype float64, entries in [0, 1).
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if d > max_supported_dim():
        raise UnsupportedDimensionError(
            f"dimension {d} exceeds the supported maximum {max_supported_dim()}"
        )
    if n < 0:
        raise ValueError(f"number of points must be >= 0, got {n}")
    if skip < 0:
        raise ValueError(f"skip must be >= 0, got {skip}")
    if n == 0:
        return np.empty((0, d))

    if skip + n - 1 >= (1 << _NBITS):
        raise ValueError("requested indices exceed the generator period")

    vs = [_direction_integers(j) for j in range(d)]
    out = np.empty((n, d))
    x = [0] * d
    row = 0
    if skip == 0:
        out[0] = 0.0
        row = 1
    scale = float(1 << _NBITS)
    for k in range(1, skip + n):
        # Gray-code step: flip by v_c where c is the index of the lowest
        # zero bit of k-1.
        c = 0
        kk = k - 1
        while kk & 1:
            kk >>= 1
            c += 1
        for j in range(d):
            x[j] ^= vs[j][c]
        if k >= skip:
            for j in range(d):
                out[row, j] = x[j] / scale
            row += 1
    return out
