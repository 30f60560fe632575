"""Red-blue colorings of point sets with small discrepancy on anchored boxes.

Engines:

* alternating signs along a point order (provably ``disc <= 1`` in d=1 with
  the coordinate order),
* a hyperbolic-cosine greedy over canonical dyadic boxes,
* a balanced random coloring,
* a balance-preserving swap local search on top of any of the above.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, replace

import numpy as np

from ._grid import grid_indices, slab_cumulative_histogram, slab_ranges
from ._seeding import derive_seed
from .discrepancy import MAX_CORNERS, _point_grid
from .errors import BudgetError, DomainError, EmptyInputError, ParseError, UnsupportedError
from .pointset import PointSet, as_coloring, as_pointset

MAX_DYADIC_LEVEL = 20
HILBERT_BITS = 16
DEFAULT_LS_BUDGET = 2000


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlternatingOrder:
    order: str = "axis:0"


@dataclass(frozen=True)
class DyadicPotential:
    max_level: int | None = None
    rate: float | None = None
    process_order: str = "input"


@dataclass(frozen=True)
class BalancedRandom:
    seed: int = 0


@dataclass(frozen=True)
class LocalSearch:
    init: object
    budget: int = DEFAULT_LS_BUDGET
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.init, LocalSearch):
            raise DomainError("LocalSearch cannot wrap another LocalSearch")
        if self.budget < 0:
            raise DomainError("budget must be >= 0")


_ALT_IDS = {"alt-axis0": "axis:0", "alt-lex": "lex", "alt-hilbert": "hilbert"}


def parse_strategy(text: str, seed: int = 0):
    """Parse a strategy id such as ``alt-axis0``, ``dyadic`` or ``dyadic+ls:5000``.

    Base ids: ``alt-axis<j>``, ``alt-lex``, ``alt-hilbert``, ``dyadic`` (optionally
    ``dyadic:<L>`` or ``dyadic:<L>:<rate>``), ``random``. A ``+ls`` or
    ``+ls:<budget>`` suffix wraps the base in :class:`LocalSearch`.
    """
    text = text.strip()
    base, _, ls = text.partition("+")
    m = re.fullmatch(r"alt-axis(\d+)", base)
    if m:
        s = AlternatingOrder(f"axis:{int(m.group(1))}")
    elif base in _ALT_IDS:
        s = AlternatingOrder(_ALT_IDS[base])
    elif base == "random":
        s = BalancedRandom(seed)
    elif base.startswith("dyadic"):
        parts = base.split(":")
        if parts[0] != "dyadic" or len(parts) > 3:
            raise ParseError(f"unknown strategy {text!r}")
        try:
            level = int(parts[1]) if len(parts) > 1 else None
            rate = float(parts[2]) if len(parts) > 2 else None
        except ValueError as exc:
            raise ParseError(f"bad dyadic parameters in {text!r}") from exc
        s = DyadicPotential(level, rate)
    else:
        raise ParseError(f"unknown strategy {text!r}")
    if ls:
        head, _, budget = ls.partition(":")
        if head != "ls":
            raise ParseError(f"unknown strategy suffix {ls!r}")
        try:
            s = LocalSearch(s, int(budget) if budget else DEFAULT_LS_BUDGET, seed)
        except ValueError as exc:
            raise ParseError(f"bad local search budget in {text!r}") from exc
    return s


def strategy_id(s) -> str:
    if isinstance(s, LocalSearch):
        suffix = "" if s.budget == DEFAULT_LS_BUDGET else f":{s.budget}"
        return f"{strategy_id(s.init)}+ls{suffix}"
    if isinstance(s, AlternatingOrder):
        if s.order.startswith("axis:"):
            return f"alt-axis{s.order.split(':')[1]}"
        return f"alt-{s.order}"
    if isinstance(s, BalancedRandom):
        return "random"
    if isinstance(s, DyadicPotential):
        out = "dyadic"
        if s.max_level is not None:
            out += f":{s.max_level}"
            if s.rate is not None:
                out += f":{s.rate!r}"
        return out
    raise UnsupportedError(f"unknown strategy {s!r}")


def strategy_to_dict(s) -> dict:
    if isinstance(s, LocalSearch):
        return {"type": "local_search", "init": strategy_to_dict(s.init), "budget": s.budget, "seed": s.seed}
    if isinstance(s, AlternatingOrder):
        return {"type": "alternating", "order": s.order}
    if isinstance(s, BalancedRandom):
        return {"type": "balanced_random", "seed": s.seed}
    return {"type": "dyadic_potential", "max_level": s.max_level, "rate": s.rate, "process_order": s.process_order}


def reseed(s, seed: int):
    """Copy of ``s`` with every embedded seed derived from ``seed``."""
    if isinstance(s, LocalSearch):
        return replace(s, init=reseed(s.init, derive_seed(seed, 1)), seed=derive_seed(seed, 0))
    if isinstance(s, BalancedRandom):
        return replace(s, seed=derive_seed(seed, 0))
    return s


# ---------------------------------------------------------------------------
# point orders
# ---------------------------------------------------------------------------


def hilbert_keys(points: np.ndarray, bits: int = HILBERT_BITS) -> np.ndarray:
    """Hilbert curve index of each point at ``bits`` levels (Skilling's transform)."""
    n, d = points.shape
    side = 1 << bits
    q = np.minimum(np.floor(points * side), side - 1).astype(np.uint64)
    X = [q[:, j].copy() for j in range(d)]
    M = np.uint64(1 << (bits - 1))
    Q = M
    while Q > 1:
        P = Q - np.uint64(1)
        for i in range(d):
            hit = (X[i] & Q) != 0
            if i == 0:
                X[0] = np.where(hit, X[0] ^ P, X[0])
                continue
            X[0] = np.where(hit, X[0] ^ P, X[0])
            t = np.where(hit, np.uint64(0), (X[0] ^ X[i]) & P)
            X[0] ^= t
            X[i] ^= t
        Q = Q >> np.uint64(1)
    for i in range(1, d):
        X[i] ^= X[i - 1]
    t = np.zeros(n, dtype=np.uint64)
    Q = M
    while Q > 1:
        t = np.where((X[d - 1] & Q) != 0, t ^ (Q - np.uint64(1)), t)
        Q = Q >> np.uint64(1)
    for i in range(d):
        X[i] ^= t
    key = np.zeros(n, dtype=np.uint64)
    for b in range(bits - 1, -1, -1):
        for i in range(d):
            key = (key << np.uint64(1)) | ((X[i] >> np.uint64(b)) & np.uint64(1))
    return key


def order_points(p, order: str = "axis:0") -> np.ndarray:
    """Deterministic permutation of point indices; ties keep input order.

    ``order`` is ``"axis:<j>"``, ``"lex"``, ``"hilbert"`` (d <= 3) or ``"input"``.
    """
    p = as_pointset(p)
    n, d = p.n, p.d
    idx = np.arange(n)
    if order == "input":
        return idx
    if order.startswith("axis:"):
        j = int(order.split(":")[1])
        if not 0 <= j < d:
            raise DomainError(f"axis {j} out of range for d={d}")
        return np.lexsort((idx, p.points[:, j]))
    if order == "lex":
        keys = (idx,) + tuple(p.points[:, j] for j in range(d - 1, -1, -1))
        return np.lexsort(keys)
    if order == "hilbert":
        if d > 3:
            raise UnsupportedError("hilbert order is only available for d <= 3")
        return np.lexsort((idx, hilbert_keys(p.points)))
    raise UnsupportedError(f"unknown order {order!r}")


def color_alternating(p, order: str = "axis:0") -> np.ndarray:
    """Signs ``+1, -1, +1, ...`` along :func:`order_points`."""
    p = as_pointset(p)
    if p.n == 0:
        raise EmptyInputError("cannot color an empty point set")
    perm = order_points(p, order)
    y = np.empty(p.n, dtype=np.int8)
    y[perm] = np.where(np.arange(p.n) % 2 == 0, 1, -1)
    return y


def balanced_random(p, seed) -> np.ndarray:
    p = as_pointset(p)
    n = p.n
    base = np.where(np.arange(n) < (n + 1) // 2, 1, -1).astype(np.int8)
    return np.random.default_rng(seed).permutation(base)


# ---------------------------------------------------------------------------
# dyadic constraint system and cosh greedy
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DyadicConstraintSystem:
    """Nonempty canonical dyadic boxes of levels ``0..max_level`` per axis.

    Box ``b`` is ``prod_j [cells[b,j] 2**-levels[b,j], (cells[b,j]+1) 2**-levels[b,j])``.
    ``incidence[i]`` lists the boxes containing point ``i``; its last entry
    is always ``global_index``, an extra constraint covering every point.
    """

    d: int
    max_level: int
    levels: np.ndarray
    cells: np.ndarray
    sizes: np.ndarray
    incidence: np.ndarray

    @property
    def n_boxes(self) -> int:
        return self.levels.shape[0]

    @property
    def global_index(self) -> int:
        return self.n_boxes

    @property
    def boxes_per_point(self) -> int:
        return self.incidence.shape[1]


def dyadic_cells(x: np.ndarray, level) -> np.ndarray:
    """Cell index at ``level``; a coordinate of exactly 1 joins the last cell."""
    k = np.asarray(level, dtype=np.int64)
    return np.minimum(np.floor(x * (2.0**k)).astype(np.int64), (1 << k) - 1)


def build_dyadic_system(p, max_level: int) -> DyadicConstraintSystem:
    p = as_pointset(p)
    L = int(max_level)
    if L > MAX_DYADIC_LEVEL:
        raise BudgetError(f"dyadic level {L} exceeds the limit {MAX_DYADIC_LEVEL}")
    if L < 1:
        raise DomainError("max_level must be >= 1")
    n, d = p.n, p.d
    combos = list(itertools.product(range(L + 1), repeat=d))
    incidence = np.empty((n, len(combos) + 1), dtype=np.int64)
    levels, cells, sizes = [], [], []
    offset = 0
    for c, lv in enumerate(combos):
        cell = np.stack([dyadic_cells(p.points[:, j], lv[j]) for j in range(d)], axis=1) if n else np.zeros((0, d), np.int64)
        if sum(lv) <= 62:
            lin = np.zeros(n, dtype=np.int64)
            for j in range(d):
                lin = (lin << lv[j]) | cell[:, j]
            _, first, inv, cnt = np.unique(lin, return_index=True, return_inverse=True, return_counts=True)
            uniq = cell[first]
        else:
            uniq, inv, cnt = np.unique(cell, axis=0, return_inverse=True, return_counts=True)
        inv = inv.ravel()
        incidence[:, c] = inv + offset
        levels.append(np.tile(np.asarray(lv, dtype=np.int64), (uniq.shape[0], 1)))
        cells.append(uniq)
        sizes.append(cnt)
        offset += uniq.shape[0]
    incidence[:, -1] = offset
    return DyadicConstraintSystem(
        d=d,
        max_level=L,
        levels=np.concatenate(levels) if levels else np.zeros((0, d), np.int64),
        cells=np.concatenate(cells) if cells else np.zeros((0, d), np.int64),
        sizes=np.concatenate(sizes) if sizes else np.zeros(0, np.int64),
        incidence=incidence,
    )


def default_dyadic_level(n: int, d: int) -> int:
    cap = max(1, int(math.floor(256 ** (1.0 / d) + 1e-9)) - 1)
    return max(1, min(math.ceil(math.log2(max(n, 2))), cap, MAX_DYADIC_LEVEL))


def _sinh_sum_sign(z: np.ndarray) -> float:
    top = float(np.max(np.abs(z))) if z.size else 0.0
    if top <= 30.0:
        return float(np.sum(np.sinh(z)))
    # scaled by 2 exp(-top); only the sign is used
    a = np.abs(z)
    return float(np.sum(np.sign(z) * (np.exp(a - top) - np.exp(-a - top))))


def greedy_potential_color(sys: DyadicConstraintSystem, rate: float | None = None, order=None) -> np.ndarray:
    """Hyperbolic-cosine greedy over the boxes of ``sys``.

    Each point, in ``order``, takes the sign minimizing the sum of
    ``cosh(rate * count)`` over its boxes after the update. Since
    ``cosh(a + r) - cosh(a - r) = 2 sinh(a) sinh(r)`` this is ``+1`` iff
    ``sum(sinh(rate * count)) <= 0``; ties go to ``+1``.
    """
    if rate is None:
        rate = 1.0 / math.sqrt(sys.boxes_per_point)
    if rate <= 0:
        raise DomainError("rate must be > 0")
    n = sys.incidence.shape[0]
    order = np.arange(n) if order is None else np.asarray(order, dtype=np.int64)
    counts = np.zeros(sys.n_boxes + 1, dtype=np.int64)
    y = np.empty(n, dtype=np.int8)
    for i in order:
        b = sys.incidence[i]
        s = 1 if _sinh_sum_sign(rate * counts[b]) <= 0 else -1
        counts[b] += s
        y[i] = s
    return y


# ---------------------------------------------------------------------------
# exact signed-count table for refinement
# ---------------------------------------------------------------------------


class SignTable:
    """Signed box sums ``S[corner]`` over the point grid, kept in sync with ``y``.

    Flipping point ``i`` changes ``S`` on the quadrant of corners at or
    above its grid position, so updates are slice adds.
    """

    def __init__(self, p: PointSet, y: np.ndarray, budget: int = MAX_CORNERS):
        grid = _point_grid(p)
        if grid.size > budget:
            raise BudgetError(f"point grid has {grid.size:.3g} corners, budget is {budget:.3g}")
        self.shape = grid.shape
        self.pos = grid_indices(p.points, grid.axes, (True,) * p.d)
        self.y = y.astype(np.int8).copy()
        dtype = np.int16 if p.n < 2**15 else np.int32
        self.S = np.empty(self.shape, dtype=dtype)
        for a0, a1 in slab_ranges(self.shape):
            self.S[a0:a1] = slab_cumulative_histogram(self.pos, self.y.astype(np.int64), grid.axes, a0, a1)

    def quadrant(self, i):
        return tuple(slice(int(a), None) for a in self.pos[i])

    def disc(self) -> int:
        return max(int(self.S.max()), -int(self.S.min()), 0)

    def flip(self, i):
        self.S[self.quadrant(i)] -= 2 * int(self.y[i])
        self.y[i] = -self.y[i]

    def flip_costs(self, candidates) -> np.ndarray:
        """Exact disc after flipping each candidate alone."""
        S = self.S.astype(np.int32)
        sufmax, sufmin = S.copy(), S.copy()
        for ax in range(S.ndim):
            sufmax = np.flip(np.maximum.accumulate(np.flip(sufmax, ax), axis=ax), ax)
            sufmin = np.flip(np.minimum.accumulate(np.flip(sufmin, ax), axis=ax), ax)
        A = np.abs(S)
        pref = []
        for ax in range(S.ndim):
            other = tuple(a for a in range(S.ndim) if a != ax)
            slab = A.max(axis=other) if other else A
            pref.append(np.maximum.accumulate(slab))
        out = np.empty(len(candidates), dtype=np.int64)
        for k, i in enumerate(candidates):
            a = tuple(int(v) for v in self.pos[i])
            s2 = 2 * int(self.y[i])
            inside = max(int(sufmax[a]) - s2, s2 - int(sufmin[a])) if all(v < dim for v, dim in zip(a, self.shape)) else 0
            outside = max((int(pref[ax][a[ax] - 1]) for ax in range(S.ndim) if a[ax] > 0), default=0)
            out[k] = max(inside, outside, 0)
        return out


def _suffix_count(mask: np.ndarray) -> np.ndarray:
    c = mask.astype(np.int32)
    for ax in range(c.ndim):
        c = np.flip(np.cumsum(np.flip(c, ax), axis=ax, dtype=np.int32), ax)
    return c


def local_search(p, init, budget: int = DEFAULT_LS_BUDGET, seed=0) -> np.ndarray:
    """Balance-preserving swap refinement of ``init``.

    A proposal swaps a ``+1`` point with a ``-1`` point and is accepted only
    if the exact combinatorial disc strictly drops. Pairs that cannot help
    (their quadrants miss some extremal corner) are never proposed; when no
    candidate pair remains the coloring is a local optimum and the search
    stops. ``budget`` caps the number of evaluated proposals.
    """
    p = as_pointset(p)
    y0 = as_coloring(init, p.n)
    if budget <= 0 or p.n < 2:
        return y0.copy()
    rng = np.random.default_rng(seed)
    table = SignTable(p, y0)
    S, pos = table.S, table.pos
    spent = 0
    while spent < budget:
        D = table.disc()
        if D == 0:
            break
        hi_mask = S >= D - 2
        lo_mask = S <= -(D - 2)
        top = np.argwhere(S == D)
        bot = np.argwhere(S == -D)
        plus = np.flatnonzero(table.y == 1)
        minus = np.flatnonzero(table.y == -1)
        # the +1 point must cover every +D corner, the -1 point every -D corner
        if top.size:
            plus = plus[np.all(pos[plus] <= top.min(axis=0), axis=1)]
        if bot.size:
            minus = minus[np.all(pos[minus] <= bot.min(axis=0), axis=1)]
        if plus.size == 0 or minus.size == 0:
            break
        hi = _suffix_count(hi_mask)
        lo = _suffix_count(lo_mask)
        del hi_mask, lo_mask

        def q(table_, a):
            if np.any(a >= np.asarray(table_.shape)):
                return 0
            return int(table_[tuple(a)])

        def improves(i, j):
            ai, aj = pos[i], pos[j]
            both = np.maximum(ai, aj)
            if q(hi, aj) - q(hi, both):
                return False
            if q(lo, ai) - q(lo, both):
                return False
            if top.size and np.any(np.all(top >= aj, axis=1)):
                return False
            if bot.size and np.any(np.all(bot >= ai, axis=1)):
                return False
            return True

        pairs = plus.size * minus.size
        accepted = False
        if pairs <= 1 << 20:
            for flat in rng.permutation(pairs):
                if spent >= budget:
                    break
                spent += 1
                i, j = plus[flat // minus.size], minus[flat % minus.size]
                if improves(i, j):
                    table.flip(i)
                    table.flip(j)
                    accepted = True
                    break
            if not accepted:
                break
        else:
            while spent < budget:
                spent += 1
                i, j = plus[rng.integers(plus.size)], minus[rng.integers(minus.size)]
                if improves(i, j):
                    table.flip(i)
                    table.flip(j)
                    break
    return table.y.copy()


def rebalance(p, y, table: SignTable | None = None) -> np.ndarray:
    """Flip ``floor(|sum y| / 2)`` majority points, each chosen to minimize exact disc."""
    p = as_pointset(p)
    y = as_coloring(y, p.n)
    imbalance = int(y.astype(np.int64).sum())
    if abs(imbalance) <= 1:
        return y.copy()
    table = table or SignTable(p, y)
    major = 1 if imbalance > 0 else -1
    for _ in range(abs(imbalance) // 2):
        cand = np.flatnonzero(table.y == major)
        costs = table.flip_costs(cand)
        table.flip(int(cand[int(np.argmin(costs))]))
    return table.y.copy()


def color(p, s) -> np.ndarray:
    """Color ``p`` with strategy ``s``; the result always has ``|sum y| <= 1``."""
    p = as_pointset(p)
    if p.n == 0:
        raise EmptyInputError("cannot color an empty point set")
    if isinstance(s, AlternatingOrder):
        return color_alternating(p, s.order)
    if isinstance(s, BalancedRandom):
        return balanced_random(p, s.seed)
    if isinstance(s, DyadicPotential):
        L = s.max_level if s.max_level is not None else default_dyadic_level(p.n, p.d)
        sys = build_dyadic_system(p, L)
        y = greedy_potential_color(sys, s.rate, order_points(p, s.process_order))
        return rebalance(p, y)
    if isinstance(s, LocalSearch):
        return local_search(p, color(p, s.init), s.budget, s.seed)
    raise UnsupportedError(f"unknown strategy {s!r}")
