"""Point sets in the unit cube and +/-1 colorings over them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, DimensionError, DomainError


@dataclass(frozen=True, eq=False)
class PointSet:
    """Ordered points in [0,1]^d stored as a read-only ``(n, d)`` array.

    Order matters: colorings and halving steps index into it. Duplicates
    are allowed.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            raise DimensionError("points must be a 2-d array of shape (n, d)")
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise DimensionError(f"points must have shape (n, d), got {pts.shape}")
        if pts.size and (not np.all(np.isfinite(pts)) or pts.min() < 0.0 or pts.max() > 1.0):
            raise DomainError("every coordinate must lie in [0, 1]")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def empty(cls, d: int) -> "PointSet":
        return cls(np.zeros((0, d)))

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.n

    def take(self, indices) -> "PointSet":
        return PointSet(self.points[np.asarray(indices, dtype=np.intp)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(np.array_equal(self.points, other.points))

    def __repr__(self) -> str:
        return f"PointSet(n={self.n}, d={self.d})"


def as_pointset(p, d: int | None = None) -> PointSet:
    """Coerce arrays and nested lists to :class:`PointSet`.

    A 1-d input is read as ``n`` points in dimension one.
    """
    if not isinstance(p, PointSet):
        arr = np.asarray(p, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        p = PointSet(arr)
    if d is not None and p.d != d:
        raise DimensionError(f"point set has dimension {p.d}, expected {d}")
    return p


def as_coloring(y, n: int | None = None) -> np.ndarray:
    """Validate a sign vector and return it as an ``int8`` array."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise AlignmentError("a coloring is a 1-d vector of signs")
    if arr.size and not np.all((arr == 1) | (arr == -1)):
        raise AlignmentError("coloring entries must be exactly +1 or -1")
    if n is not None and arr.shape[0] != n:
        raise AlignmentError(f"coloring has length {arr.shape[0]}, point set has {n} points")
    return arr.astype(np.int8)
