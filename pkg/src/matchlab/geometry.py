"""Planar regions used by densities, partitions and the transport graph builders."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle [x0, x1] x [y0, y1]."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x0 <= self.x1 and self.y0 <= self.y1):
            raise InputError(f"degenerate rectangle {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized membership for an (m, 2) array (closed rectangle)."""
        pts = np.atleast_2d(pts)
        return (
            (pts[:, 0] >= self.x0)
            & (pts[:, 0] <= self.x1)
            & (pts[:, 1] >= self.y0)
            & (pts[:, 1] <= self.y1)
        )

    def intersect(self, other: "Rect") -> "Rect | None":
        x0, x1 = max(self.x0, other.x0), min(self.x1, other.x1)
        y0, y1 = max(self.y0, other.y0), min(self.y1, other.y1)
        if x0 >= x1 or y0 >= y1:
            return None
        return Rect(x0, y0, x1, y1)

    def boundary_sq_distance(self, pts: np.ndarray) -> np.ndarray:
        """Squared distance from interior points to the nearest side."""
        pts = np.atleast_2d(pts)
        d = np.minimum.reduce(
            [
                pts[:, 0] - self.x0,
                self.x1 - pts[:, 0],
                pts[:, 1] - self.y0,
                self.y1 - pts[:, 1],
            ]
        )
        return d * d


@dataclass(frozen=True)
class Annulus:
    """Annulus {r_inner <= |x| <= r_outer} centered at the origin.

    r_inner == 0 gives a disk.
    """

    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not (0.0 <= self.r_inner <= self.r_outer):
            raise InputError(f"invalid annulus radii {self}")

    @property
    def area(self) -> float:
        return math.pi * (self.r_outer**2 - self.r_inner**2)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return (r2 >= self.r_inner**2) & (r2 <= self.r_outer**2)


def as_points(obj) -> np.ndarray:
    """Coerce one point / a sequence of points to a float64 (m, 2) array."""
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError(f"expected planar points of shape (m, 2), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise InputError("points must have finite coordinates")
    return arr
