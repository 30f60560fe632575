"""Exact star-discrepancy with respect to a general measure.

The empirical count of an anchored box only changes when a corner
coordinate crosses a point coordinate, and the box measure only jumps at
atom coordinates. Sweeping every corner of the product grid built from
those coordinates (plus 1) and every per-axis open/closed choice therefore
realizes the supremum over all anchored boxes exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._grid import grid_indices, slab_cumulative_histogram, slab_ranges
from .errors import BudgetError, DimensionError, DomainError, EmptyInputError
from .measures import Measure, all_closures, box_measure
from .pointset import PointSet, as_coloring, as_pointset

MAX_CORNERS = 10**8
_SLAB_CELLS = 1 << 21


@dataclass(frozen=True)
class CriticalGrid:
    axes: tuple

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.float64))

    def corner(self, index) -> tuple:
        return tuple(float(self.axes[j][i]) for j, i in enumerate(index))


@dataclass(frozen=True)
class DiscrepancyReport:
    """Outcome of an exact sweep.

    ``value`` is the star-discrepancy. ``witness_side`` is ``"over"`` when
    the empirical fraction exceeds the measure at the witness box and
    ``"under"`` otherwise; ``witness_closure`` says which box ends are
    closed. Counts and masses are reported for the all-closed and all-open
    boxes at the witness corner.
    """

    value: float
    witness_corner: tuple
    witness_side: str
    witness_closure: tuple
    closed_count: int
    open_count: int
    mu_closed: float
    mu_open: float
    n: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "witness_corner": list(self.witness_corner),
            "witness_side": self.witness_side,
            "witness_closure": list(self.witness_closure),
            "closed_count": self.closed_count,
            "open_count": self.open_count,
            "mu_closed": self.mu_closed,
            "mu_open": self.mu_open,
            "n": self.n,
        }


def _prepare(p, m: Measure) -> PointSet:
    p = as_pointset(p)
    if p.d != m.d:
        raise DimensionError(f"point set has dimension {p.d}, measure has {m.d}")
    return p


def critical_grid(p, m: Measure) -> CriticalGrid:
    """Per-axis sorted candidates: point coordinates, atoms of ``m``, and 1."""
    p = _prepare(p, m)
    axes = []
    for j in range(p.d):
        a = np.unique(np.concatenate([p.points[:, j], m.atoms(j), [1.0]]))
        a.setflags(write=False)
        axes.append(a)
    return CriticalGrid(tuple(axes))


def _point_grid(p: PointSet) -> CriticalGrid:
    axes = []
    for j in range(p.d):
        a = np.unique(np.concatenate([p.points[:, j], [1.0]]))
        a.setflags(write=False)
        axes.append(a)
    return CriticalGrid(tuple(axes))


def _check_budget(grid: CriticalGrid, budget: int):
    if grid.size > budget:
        raise BudgetError(f"critical grid has {grid.size:.3g} corners, budget is {budget:.3g}")


def box_counts(p, corner) -> tuple[int, int]:
    """Number of points in the closed and in the open anchored box at ``corner``."""
    p = as_pointset(p)
    t = np.asarray(corner, dtype=np.float64).ravel()
    if t.size != p.d:
        raise DimensionError(f"corner has dimension {t.size}, points have {p.d}")
    if t.min() < 0 or t.max() > 1:
        raise DomainError("corner must lie in [0,1]^d")
    closed = int(np.count_nonzero(np.all(p.points <= t, axis=1)))
    open_ = int(np.count_nonzero(np.all(p.points < t, axis=1)))
    return closed, open_


def _candidates(m: Measure):
    """(side, count closure, measure closure) terms to maximize at each corner."""
    d = m.d
    if m.atomless:
        return [("over", (True,) * d, None), ("under", (False,) * d, None)]
    pats = all_closures(d)
    return [("over", c, c) for c in pats] + [("under", c, c) for c in pats]


def star_discrepancy(p, m: Measure, budget: int = MAX_CORNERS) -> DiscrepancyReport:
    """Exact ``sup_A |#(P in A)/N - mu(A)|`` over anchored boxes ``A``.

    Ties go to the lexicographically smallest witness corner.
    """
    p = _prepare(p, m)
    if p.n == 0:
        raise EmptyInputError("star discrepancy of an empty point set is undefined")
    grid = critical_grid(p, m)
    _check_budget(grid, budget)
    n = p.n
    shape = grid.shape
    cands = _candidates(m)
    count_idx = {}
    for _, cc, _ in cands:
        if cc not in count_idx:
            count_idx[cc] = grid_indices(p.points, grid.axes, cc)

    best = -np.inf
    best_flat = 0
    best_cand = 0
    row_cells = int(np.prod(shape[1:], dtype=np.int64)) if len(shape) > 1 else 1
    for a0, a1 in slab_ranges(shape, _SLAB_CELLS // max(1, len(cands))):
        sub = [grid.axes[0][a0:a1]] + list(grid.axes[1:])
        counts = {cc: slab_cumulative_histogram(idx, None, grid.axes, a0, a1) for cc, idx in count_idx.items()}
        if m.atomless:
            mu_n = n * m.grid_cdf(sub, (True,) * m.d)
            terms = [counts[cands[0][1]] - mu_n, mu_n - counts[cands[1][1]]]
        else:
            mus = {c: n * m.grid_cdf(sub, c) for c in all_closures(m.d)}
            terms = [counts[cc] - mus[mc] for side, cc, mc in cands if side == "over"]
            terms += [mus[mc] - counts[cc] for side, cc, mc in cands if side == "under"]
        vals = terms[0].copy()
        for t in terms[1:]:
            np.maximum(vals, t, out=vals)
        np.maximum(vals, 0.0, out=vals)
        local = int(np.argmax(vals))
        v = float(vals.flat[local])
        if v > best:
            best = v
            best_flat = a0 * row_cells + local
            best_cand = next((i for i, t in enumerate(terms) if float(t.flat[local]) == v), 0)
    index = np.unravel_index(best_flat, shape)
    corner = grid.corner(index)
    side, cc, _ = cands[best_cand]
    closed_count, open_count = box_counts(p, corner)
    d = m.d
    return DiscrepancyReport(
        value=best / n,
        witness_corner=corner,
        witness_side=side,
        witness_closure=tuple("closed" if f else "open" for f in cc),
        closed_count=closed_count,
        open_count=open_count,
        mu_closed=box_measure(m, corner, (True,) * d),
        mu_open=box_measure(m, corner, (False,) * d),
        n=n,
    )


def geometric_disc(p, m: Measure, budget: int = MAX_CORNERS) -> float:
    """Unnormalized discrepancy ``sup_A |#(P in A) - N mu(A)|``."""
    p = _prepare(p, m)
    return p.n * star_discrepancy(p, m, budget).value


def star_discrepancy_lower_bound(p, m: Measure, trials: int, seed) -> float:
    """Randomized lower bound on :func:`star_discrepancy`.

    The first trial is the corner ``(1, ..., 1)``; the rest are uniform
    random corners. Each corner is scored with every relevant closure.
    """
    p = _prepare(p, m)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if p.n == 0:
        raise EmptyInputError("empty point set")
    rng = np.random.default_rng(seed)
    n, d = p.n, p.d
    pats = [(True,) * d, (False,) * d] if m.atomless else all_closures(d)
    best = 0.0
    step = max(1, (1 << 23) // max(n * d, 1))
    done = 0
    while done < trials:
        k = min(step, trials - done)
        corners = rng.random((k, d))
        if done == 0:
            corners[0] = 1.0
        for c in pats:
            inside = np.ones((k, n), dtype=bool)
            for j in range(d):
                if c[j]:
                    inside &= p.points[None, :, j] <= corners[:, None, j]
                else:
                    inside &= p.points[None, :, j] < corners[:, None, j]
            cnt = inside.sum(axis=1)
            mu = m.batch_cdf(corners, c)
            best = max(best, float(np.max(np.abs(cnt / n - mu))))
        done += k
    return best


def combinatorial_disc(p, y, budget: int = MAX_CORNERS) -> tuple[int, tuple]:
    """Largest ``|sum of signs|`` over anchored boxes, with its witness corner.

    Open and mixed boxes reduce to closed boxes at neighbouring grid corners
    (or to the empty box), so the closed sweep is exhaustive. The full cube
    is always among the boxes and is reported as the witness whenever it
    attains the maximum; otherwise the lexicographically smallest corner is.
    """
    p = as_pointset(p)
    if p.n == 0:
        raise EmptyInputError("empty point set")
    y = as_coloring(y, p.n)
    grid = _point_grid(p)
    _check_budget(grid, budget)
    idx = grid_indices(p.points, grid.axes, (True,) * p.d)
    best, best_flat = -1, 0
    row_cells = int(np.prod(grid.shape[1:], dtype=np.int64)) if p.d > 1 else 1
    w = y.astype(np.int64)
    for a0, a1 in slab_ranges(grid.shape, _SLAB_CELLS):
        s = np.abs(slab_cumulative_histogram(idx, w, grid.axes, a0, a1))
        local = int(np.argmax(s))
        v = int(s.flat[local])
        if v > best:
            best, best_flat = v, a0 * row_cells + local
    if abs(int(w.sum())) == best:
        return best, (1.0,) * p.d
    return best, grid.corner(np.unravel_index(best_flat, grid.shape))

