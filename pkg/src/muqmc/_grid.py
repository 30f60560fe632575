"""Shared counting kernels over product grids of anchored-box corners."""

from __future__ import annotations

import numpy as np


def closure_tuple(c, d: int) -> tuple[bool, ...]:
    """Normalize a closure argument to a tuple of ``d`` booleans (True = closed).

    Accepts ``"closed"``, ``"open"``, a bool, or a length-``d`` sequence of
    any of those.
    """
    from .errors import DimensionError

    def flag(v):
        if isinstance(v, (bool, np.bool_)):
            return bool(v)
        if v in ("closed", "c"):
            return True
        if v in ("open", "o"):
            return False
        raise ValueError(f"unknown closure flag {v!r}")

    if c is None:
        return (True,) * d
    if isinstance(c, (str, bool, np.bool_)):
        return (flag(c),) * d
    out = tuple(flag(v) for v in c)
    if len(out) != d:
        raise DimensionError(f"closure has length {len(out)}, expected {d}")
    return out


def grid_indices(coords: np.ndarray, grids, closure) -> np.ndarray:
    """Per-axis index of the first grid corner whose box contains each item.

    Item ``x`` lies in the box at grid index ``a`` on axis ``j`` iff
    ``a >= idx[:, j]``. Closed axes use ``x <= g``; open axes ``x < g``.
    """
    n, d = coords.shape
    idx = np.empty((n, d), dtype=np.int64)
    for j in range(d):
        side = "left" if closure[j] else "right"
        idx[:, j] = np.searchsorted(grids[j], coords[:, j], side=side)
    return idx


def cumulative_histogram(idx: np.ndarray, weights, shape, dtype=np.int64) -> np.ndarray:
    """Sum of ``weights`` over items with ``idx <= corner`` for every corner.

    ``idx`` comes from :func:`grid_indices`; rows with any index beyond the
    grid are ignored.
    """
    shape = tuple(int(s) for s in shape)
    total = int(np.prod(shape)) if shape else 1
    keep = np.all(idx < np.asarray(shape, dtype=np.int64), axis=1)
    if weights is None:
        w = None
    else:
        w = np.asarray(weights)[keep]
    if total == 0:
        return np.zeros(shape, dtype=dtype)
    flat = np.ravel_multi_index(tuple(idx[keep].T), shape) if keep.any() else np.zeros(0, dtype=np.int64)
    hist = np.bincount(flat, weights=w, minlength=total).astype(dtype, copy=False).reshape(shape)
    for axis in range(len(shape)):
        np.cumsum(hist, axis=axis, out=hist)
    return hist


def slab_ranges(shape, max_cells: int = 1 << 22):
    """Split axis 0 of a product grid into contiguous slabs of bounded size."""
    rest = int(np.prod(shape[1:])) if len(shape) > 1 else 1
    rows = max(1, max_cells // max(rest, 1))
    for a0 in range(0, shape[0], rows):
        yield a0, min(shape[0], a0 + rows)


def slab_cumulative_histogram(idx: np.ndarray, weights, grids, a0: int, a1: int, dtype=np.int64) -> np.ndarray:
    """Cumulative histogram restricted to rows ``a0:a1`` of axis 0.

    Items whose axis-0 index is below ``a0`` are folded into the first row so
    a single cumulative pass still yields exact totals.
    """
    shape = (a1 - a0,) + tuple(len(g) for g in grids[1:])
    sub = idx.copy()
    sub[:, 0] = np.maximum(sub[:, 0] - a0, 0)
    return cumulative_histogram(sub, weights, shape, dtype=dtype)
