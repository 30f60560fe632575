"""Normalized Borel measures on the unit cube.

Every measure exposes the anchored-box oracle ``mu(prod_j [0, t_j])`` (with
any per-axis choice of open or closed right end), exact sampling, and the
per-axis atom coordinates that the exact discrepancy sweep needs.

The family is closed on purpose: arbitrary callbacks cannot report their
atoms, and without atoms the supremum over boxes cannot be taken exactly.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np

from ._grid import closure_tuple, cumulative_histogram, grid_indices
from .errors import DimensionError, DomainError, ParseError
from .pointset import PointSet

MASS_TOL = 1e-12
RENORM_WARN_TOL = 1e-9


def _normalize_weights(weights, what: str) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size == 0:
        raise DomainError(f"{what}: weights must be nonempty")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DomainError(f"{what}: weights must be finite and nonnegative")
    s = float(w.sum())
    if s <= 0:
        raise DomainError(f"{what}: weights sum to zero")
    if abs(s - 1.0) > RENORM_WARN_TOL:
        warnings.warn(f"{what}: weights sum to {s!r}, renormalizing", stacklevel=3)
    w = w / s
    w.setflags(write=False)
    return w


def _frozen(a, dtype=np.float64) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


class Measure:
    """Base class. Subclasses are immutable after construction."""

    kind: str = ""

    @property
    def d(self) -> int:
        raise NotImplementedError

    @property
    def atomless(self) -> bool:
        return True

    def grid_cdf(self, grids, closure) -> np.ndarray:
        """``mu`` of every anchored box whose corner lies on the product grid."""
        raise NotImplementedError

    def batch_cdf(self, corners: np.ndarray, closure) -> np.ndarray:
        """``mu`` of the anchored boxes at each row of ``corners``."""
        raise NotImplementedError

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def atoms(self, axis: int) -> np.ndarray:
        _check_axis(self, axis)
        return np.zeros(0)

    def to_dict(self) -> dict:
        raise NotImplementedError


def _check_axis(m: Measure, axis: int):
    if not 0 <= axis < m.d:
        raise DimensionError(f"axis {axis} out of range for d={m.d}")


def _outer(factors) -> np.ndarray:
    return reduce(np.multiply.outer, factors)


@dataclass(frozen=True, eq=False)
class Uniform(Measure):
    dim: int
    kind = "uniform"

    def __post_init__(self):
        if int(self.dim) < 1:
            raise DomainError("dimension must be >= 1")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def d(self):
        return self.dim

    def grid_cdf(self, grids, closure):
        return _outer([np.asarray(g, dtype=np.float64) for g in grids])

    def batch_cdf(self, corners, closure):
        return np.prod(corners, axis=1)

    def draw(self, n, rng):
        return rng.random((n, self.dim))

    def to_dict(self):
        return {"type": "uniform", "d": self.dim}


@dataclass(frozen=True, eq=False)
class ProductPower(Measure):
    """Independent marginals with CDF ``F_j(x) = x**alphas[j]``."""

    alphas: np.ndarray
    kind = "product_power"

    def __post_init__(self):
        a = _frozen(self.alphas)
        if a.ndim != 1 or a.size < 1:
            raise DomainError("alphas must be a nonempty list")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise DomainError("every alpha must be > 0")
        object.__setattr__(self, "alphas", a)

    @property
    def d(self):
        return self.alphas.size

    def grid_cdf(self, grids, closure):
        return _outer([np.asarray(g, dtype=np.float64) ** a for g, a in zip(grids, self.alphas)])

    def batch_cdf(self, corners, closure):
        return np.prod(corners ** self.alphas, axis=1)

    def draw(self, n, rng):
        return rng.random((n, self.d)) ** (1.0 / self.alphas)

    def to_dict(self):
        return {"type": "product_power", "alphas": self.alphas.tolist()}


@dataclass(frozen=True, eq=False)
class PiecewiseConstantDyadic(Measure):
    """Constant density on each cell of the level-``level`` dyadic grid.

    ``weights`` holds the ``2**(d*level)`` cell masses in C order: the cell
    ``(i_0, ..., i_{d-1})`` is ``prod_j [i_j h, (i_j+1) h)`` with
    ``h = 2**-level`` and axis 0 varying slowest.
    """

    dim: int
    level: int
    weights: np.ndarray
    kind = "piecewise_dyadic"

    def __post_init__(self):
        dim, level = int(self.dim), int(self.level)
        if dim < 1 or level < 0:
            raise DomainError("need d >= 1 and level >= 0")
        size = np.size(self.weights)
        if size != 2 ** (dim * level):
            raise DomainError(f"expected {2 ** (dim * level)} cell weights, got {size}")
        w = _normalize_weights(self.weights, "piecewise_dyadic")
        w = w.reshape((2**level,) * dim)
        w.setflags(write=False)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "weights", w)

    @property
    def d(self):
        return self.dim

    def _overlap(self, t):
        # fraction of each cell's extent along one axis lying in [0, t]
        cells = 2**self.level
        return np.clip(np.asarray(t, dtype=np.float64)[:, None] * cells - np.arange(cells)[None, :], 0.0, 1.0)

    def grid_cdf(self, grids, closure):
        mats = [self._overlap(g) for g in grids]
        letters = "abcdefgh"
        cell = "ijklmnop"
        sub = ",".join(f"{letters[j]}{cell[j]}" for j in range(self.dim))
        sub += "," + cell[: self.dim] + "->" + letters[: self.dim]
        return np.einsum(sub, *mats, self.weights, optimize=True)

    def batch_cdf(self, corners, closure):
        mats = [self._overlap(corners[:, j]) for j in range(self.dim)]
        cell = "ijklmnop"
        sub = ",".join(f"z{cell[j]}" for j in range(self.dim))
        sub += "," + cell[: self.dim] + "->z"
        return np.einsum(sub, *mats, self.weights, optimize=True)

    def draw(self, n, rng):
        cells = 2**self.level
        flat = rng.choice(self.weights.size, size=n, p=self.weights.ravel())
        idx = np.stack(np.unravel_index(flat, self.weights.shape), axis=1)
        return (idx + rng.random((n, self.dim))) / cells

    def to_dict(self):
        return {"type": "piecewise_dyadic", "d": self.dim, "level": self.level, "weights": self.weights.ravel().tolist()}


@dataclass(frozen=True, eq=False)
class Discrete(Measure):
    """Finitely many atoms with nonnegative masses."""

    atom_points: np.ndarray
    weights: np.ndarray | None = None
    kind = "discrete"

    def __post_init__(self):
        pts = np.array(self.atom_points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DomainError("atoms must be a nonempty (k, d) array")
        if not np.all(np.isfinite(pts)) or pts.min() < 0 or pts.max() > 1:
            raise DomainError("atoms must lie in [0,1]^d")
        w = self.weights
        if w is None:
            w = np.full(pts.shape[0], 1.0 / pts.shape[0])
        w = _normalize_weights(w, "discrete")
        if w.size != pts.shape[0]:
            raise DomainError(f"{pts.shape[0]} atoms but {w.size} weights")
        pts.setflags(write=False)
        object.__setattr__(self, "atom_points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def d(self):
        return self.atom_points.shape[1]

    @property
    def atomless(self):
        return False

    def grid_cdf(self, grids, closure):
        grids = [np.asarray(g, dtype=np.float64) for g in grids]
        idx = grid_indices(self.atom_points, grids, closure)
        return cumulative_histogram(idx, self.weights, [len(g) for g in grids], dtype=np.float64)

    def batch_cdf(self, corners, closure):
        out = np.empty(corners.shape[0])
        k = self.atom_points.shape[0]
        step = max(1, (1 << 22) // max(k * self.d, 1))
        for s in range(0, corners.shape[0], step):
            c = corners[s : s + step, None, :]
            inside = np.ones((c.shape[0], k), dtype=bool)
            for j in range(self.d):
                if closure[j]:
                    inside &= self.atom_points[None, :, j] <= c[:, :, j]
                else:
                    inside &= self.atom_points[None, :, j] < c[:, :, j]
            out[s : s + step] = inside @ self.weights
        return out

    def draw(self, n, rng):
        return self.atom_points[rng.choice(self.weights.size, size=n, p=self.weights)]

    def atoms(self, axis):
        _check_axis(self, axis)
        return np.unique(self.atom_points[self.weights > 0, axis])

    def to_dict(self):
        return {"type": "discrete", "atoms": self.atom_points.tolist(), "weights": self.weights.tolist()}


def clayton_copula(u, v, theta: float) -> np.ndarray:
    """Clayton copula ``(u**-theta + v**-theta - 1) ** (-1/theta)``.

    Evaluated as ``a (1 + (a/b)**theta - a**theta) ** (-1/theta)`` with
    ``a = min(u, v)``, ``b = max(u, v)``. The bracket is at least 1, so this
    cannot overflow or underflow as either argument goes to 0.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    a, b = np.minimum(u, v), np.maximum(u, v)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = a * (1.0 + (a / b) ** theta - a**theta) ** (-1.0 / theta)
    return np.where(a <= 0, 0.0, c)


@dataclass(frozen=True, eq=False)
class Clayton2D(Measure):
    """Clayton copula coupling two power marginals ``F_j(x) = x**alphas[j]``."""

    theta: float
    alphas: np.ndarray
    kind = "clayton2d"

    def __post_init__(self):
        theta = float(self.theta)
        if not np.isfinite(theta) or theta <= 0:
            raise DomainError("theta must be > 0")
        a = _frozen(self.alphas)
        if a.shape != (2,) or np.any(a <= 0) or not np.all(np.isfinite(a)):
            raise DomainError("clayton2d needs two positive marginal exponents")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "alphas", a)

    @property
    def d(self):
        return 2

    def grid_cdf(self, grids, closure):
        u = np.asarray(grids[0], dtype=np.float64) ** self.alphas[0]
        v = np.asarray(grids[1], dtype=np.float64) ** self.alphas[1]
        return clayton_copula(u[:, None], v[None, :], self.theta)

    def batch_cdf(self, corners, closure):
        return clayton_copula(corners[:, 0] ** self.alphas[0], corners[:, 1] ** self.alphas[1], self.theta)

    def draw(self, n, rng):
        w = rng.random((n, 2))
        u = w[:, 0]
        th = self.theta
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            v = ((w[:, 1] ** (-th / (1.0 + th)) - 1.0) * u ** (-th) + 1.0) ** (-1.0 / th)
        v = np.nan_to_num(v, nan=0.0, posinf=1.0, neginf=0.0)
        out = np.empty((n, 2))
        out[:, 0] = u ** (1.0 / self.alphas[0])
        out[:, 1] = np.clip(v, 0.0, 1.0) ** (1.0 / self.alphas[1])
        return out

    def to_dict(self):
        return {"type": "clayton2d", "theta": self.theta, "alphas": self.alphas.tolist()}


@dataclass(frozen=True, eq=False)
class Mixture(Measure):
    components: tuple
    weights: np.ndarray
    kind = "mixture"

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise DomainError("mixture needs at least one component")
        if not all(isinstance(c, Measure) for c in comps):
            raise DomainError("mixture components must be measures")
        dims = {c.d for c in comps}
        if len(dims) != 1:
            raise DimensionError(f"mixture components disagree on dimension: {sorted(dims)}")
        w = _normalize_weights(self.weights, "mixture")
        if w.size != len(comps):
            raise DomainError(f"{len(comps)} components but {w.size} weights")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", w)

    @property
    def d(self):
        return self.components[0].d

    @property
    def atomless(self):
        return all(c.atomless for c in self.components)

    def grid_cdf(self, grids, closure):
        return sum(w * c.grid_cdf(grids, closure) for w, c in zip(self.weights, self.components) if w > 0)

    def batch_cdf(self, corners, closure):
        return sum(w * c.batch_cdf(corners, closure) for w, c in zip(self.weights, self.components) if w > 0)

    def draw(self, n, rng):
        labels = rng.choice(len(self.components), size=n, p=self.weights)
        seeds = rng.integers(0, 2**63, size=len(self.components))
        out = np.empty((n, self.d))
        for c, comp in enumerate(self.components):
            where = labels == c
            out[where] = comp.draw(int(where.sum()), np.random.default_rng(int(seeds[c])))
        return out

    def atoms(self, axis):
        _check_axis(self, axis)
        parts = [c.atoms(axis) for w, c in zip(self.weights, self.components) if w > 0]
        return np.unique(np.concatenate(parts)) if parts else np.zeros(0)

    def to_dict(self):
        return {
            "type": "mixture",
            "weights": self.weights.tolist(),
            "components": [c.to_dict() for c in self.components],
        }


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def _check_corner(m: Measure, corner) -> np.ndarray:
    t = np.asarray(corner, dtype=np.float64).ravel()
    if t.size != m.d:
        raise DimensionError(f"corner has dimension {t.size}, measure has {m.d}")
    if not np.all(np.isfinite(t)) or t.min() < 0 or t.max() > 1:
        raise DomainError("corner must lie in [0,1]^d")
    return t


def box_measure(m: Measure, corner, closure="closed") -> float:
    """Mass of the anchored box at ``corner``.

    Axis ``j`` contributes ``[0, corner_j]`` when closed and ``[0, corner_j)``
    when open. For atomless measures the closure does not matter.
    """
    t = _check_corner(m, corner)
    c = closure_tuple(closure, m.d)
    val = float(m.batch_cdf(t[None, :], c)[0])
    return min(1.0, max(0.0, val))


def box_measure_batch(m: Measure, corners, closure="closed") -> np.ndarray:
    corners = np.asarray(corners, dtype=np.float64)
    if corners.ndim != 2 or corners.shape[1] != m.d:
        raise DimensionError(f"corners must have shape (k, {m.d})")
    if corners.size and (corners.min() < 0 or corners.max() > 1):
        raise DomainError("corners must lie in [0,1]^d")
    return np.clip(m.batch_cdf(corners, closure_tuple(closure, m.d)), 0.0, 1.0)


def sample(m: Measure, n: int, seed) -> PointSet:
    """Draw ``n`` i.i.d. points from ``m``; a pure function of ``seed``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    rng = np.random.default_rng(seed)
    pts = m.draw(int(n), rng) if n else np.zeros((0, m.d))
    return PointSet(np.clip(pts, 0.0, 1.0))


def atoms(m: Measure, axis: int) -> np.ndarray:
    """Sorted coordinates on ``axis`` where the marginal of ``m`` has an atom."""
    return m.atoms(axis)


def all_closures(d: int):
    return list(itertools.product((True, False), repeat=d))


def total_mass(m: Measure) -> float:
    return float(m.batch_cdf(np.ones((1, m.d)), (True,) * m.d)[0])


# ---------------------------------------------------------------------------
# JSON configuration
# ---------------------------------------------------------------------------

_TYPES = ("uniform", "product_power", "piecewise_dyadic", "discrete", "clayton2d", "mixture")


def _field(doc, name, where):
    if name not in doc:
        raise ParseError(f"{where}: missing field {name!r}")
    return doc[name]


def measure_from_dict(doc, where: str = "measure") -> Measure:
    """Build a measure from its JSON form (see README for the schema)."""
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected an object")
    kind = doc.get("type")
    if kind not in _TYPES:
        raise ParseError(f"{where}: unknown measure \"type\" discriminator {kind!r}; expected one of {list(_TYPES)}")
    try:
        if kind == "uniform":
            return Uniform(int(_field(doc, "d", where)))
        if kind == "product_power":
            return ProductPower(_field(doc, "alphas", where))
        if kind == "piecewise_dyadic":
            return PiecewiseConstantDyadic(int(_field(doc, "d", where)), int(_field(doc, "level", where)), _field(doc, "weights", where))
        if kind == "discrete":
            m = Discrete(_field(doc, "atoms", where), doc.get("weights"))
            if "d" in doc and int(doc["d"]) != m.d:
                raise ParseError(f"{where}: declared d={doc['d']} but atoms have d={m.d}")
            return m
        if kind == "clayton2d":
            return Clayton2D(float(_field(doc, "theta", where)), doc.get("alphas", [1.0, 1.0]))
        comps = _field(doc, "components", where)
        if not isinstance(comps, list):
            raise ParseError(f"{where}: components must be a list")
        parsed = [measure_from_dict(c, f"{where}.components[{i}]") for i, c in enumerate(comps)]
        return Mixture(tuple(parsed), _field(doc, "weights", where))
    except (DomainError, DimensionError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{where}: {exc}") from exc


def measure_to_dict(m: Measure) -> dict:
    return m.to_dict()
