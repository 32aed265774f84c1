"""Arithmetic on the unit circle ``M = R/Z``.

Points are plain floats (or float arrays) in ``[0, 1)``; every map formula is
written on the lift and reduced with :func:`wrap`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = 1e-12

CirclePoint = float


def wrap(x):
    """Reduce ``x`` modulo 1 into ``[0, 1)``. Accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("wrap() requires finite input")
    r = arr - np.floor(arr)
    # x - floor(x) rounds to 1.0 for tiny negative x
    r = np.where(r >= 1.0, 0.0, r)
    if r.ndim == 0:
        return float(r)
    return r


def circle_dist(x, y):
    """Geodesic distance on the circle, in ``[0, 1/2]``."""
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) % 1.0
    d = np.minimum(d, 1.0 - d)
    if d.ndim == 0:
        return float(d)
    return d


def ccw_offset(x, y):
    """Counter-clockwise arc length from ``x`` to ``y``, in ``[0, 1)``."""
    return wrap(np.asarray(y, dtype=float) - np.asarray(x, dtype=float))


@dataclass(frozen=True)
class CircleInterval:
    """Closed arc ``{start + s mod 1 : 0 <= s <= length}``."""

    start: float
    length: float

    def __post_init__(self):
        if not 0.0 <= self.length <= 1.0:
            raise ValueError(f"arc length must lie in [0, 1], got {self.length}")
        object.__setattr__(self, "start", wrap(self.start))

    @classmethod
    def from_endpoints(cls, left, right):
        """Arc running counter-clockwise from ``left`` to ``right``."""
        return cls(left, ccw_offset(left, right))

    @property
    def end(self) -> float:
        return wrap(self.start + self.length)

    def contains(self, x, tol: float = EPS):
        off = ccw_offset(self.start, x)
        inside = (off <= self.length + tol) | (off >= 1.0 - tol)
        if self.length >= 1.0:
            inside = np.ones_like(off, dtype=bool)
        if np.ndim(inside) == 0:
            return bool(inside)
        return inside

    def intersects(self, other: "CircleInterval") -> bool:
        return bool(self.contains(other.start) or other.contains(self.start))
