"""Koksma-Hlawka checks for product test functions under a general measure.

For ``f(x) = prod_j g_j(x_j)`` with every ``g_j`` monotone, the Hardy-Krause
variation anchored at ``(1, ..., 1)`` is

    sum over nonempty u of prod_{j in u} |g_j(1) - g_j(0)| * prod_{j not in u} |g_j(1)|

and pairs with origin-anchored boxes: writing
``f(x) = sum_u (-1)^|u| int d_u f(t_u, 1) 1[x_u <= t_u] dt_u`` shows that the
integration error is at most ``D*`` times that sum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._seeding import derive_seed
from .discrepancy import star_discrepancy
from .errors import DimensionError, DomainError, EmptyInputError, ParseError, UnsupportedError
from .measures import Clayton2D, Discrete, Measure, Mixture, PiecewiseConstantDyadic, ProductPower, Uniform, sample
from .pointset import as_pointset

KH_TOL = 1e-12


@dataclass(frozen=True)
class Factor:
    """One monotone factor: ``power`` x**p, ``affine`` a + b x, or ``exp`` e**(c x)."""

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind == "power":
            (p,) = self.params
            if p < 0:
                raise DomainError("power exponent must be >= 0")
        elif self.kind == "affine":
            a, b = self.params
        elif self.kind == "exp":
            (c,) = self.params
        else:
            raise UnsupportedError(f"unsupported factor {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "power":
            p = self.params[0]
            return np.ones_like(x) if p == 0 else x**p
        if self.kind == "affine":
            a, b = self.params
            return a + b * x
        return np.exp(self.params[0] * x)

    def uniform_mean(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """Average of the factor over ``[lo, hi]``."""
        w = hi - lo
        if self.kind == "power":
            p = self.params[0]
            return (hi ** (p + 1) - lo ** (p + 1)) / ((p + 1) * w)
        if self.kind == "affine":
            a, b = self.params
            return a + b * (lo + hi) / 2
        c = self.params[0]
        if c * w == 0:
            return math.exp(c * lo)
        # expm1 keeps small c * w accurate
        return math.exp(c * lo) * math.expm1(c * w) / (c * w)

    def label(self) -> str:
        return f"{self.kind}:" + ":".join(f"{v:g}" for v in self.params)


@dataclass(frozen=True)
class TestFunction:
    factors: tuple

    __test__ = False  # keep pytest from collecting this class

    @property
    def d(self) -> int:
        return len(self.factors)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if x.shape[1] != self.d:
            raise DimensionError(f"function has d={self.d}, points have d={x.shape[1]}")
        out = np.ones(x.shape[0])
        for j, g in enumerate(self.factors):
            out = out * g(x[:, j])
        return out

    def label(self) -> str:
        return ",".join(g.label() for g in self.factors)


def product(*factors) -> TestFunction:
    return TestFunction(tuple(factors))


def power(p) -> Factor:
    return Factor("power", (p,))


def affine(a, b) -> Factor:
    return Factor("affine", (a, b))


def exponential(c) -> Factor:
    return Factor("exp", (c,))


def parse_function(text: str) -> TestFunction:
    """``"power:1,power:1"`` -> ``x1 * x2``; factors ``power:p``, ``affine:a:b``, ``exp:c``."""
    factors = []
    for part in text.split(","):
        bits = part.strip().split(":")
        try:
            vals = tuple(float(v) for v in bits[1:])
            factors.append(Factor(bits[0], vals))
        except (ValueError, TypeError) as exc:
            raise ParseError(f"bad factor {part!r}: expected power:p, affine:a:b or exp:c") from exc
        except UnsupportedError as exc:
            raise ParseError(str(exc)) from exc
    return TestFunction(tuple(factors))


def _check(p_d: int, f: TestFunction):
    if p_d != f.d:
        raise DimensionError(f"function has d={f.d}, expected {p_d}")


def qmc_estimate(p, f: TestFunction) -> float:
    p = as_pointset(p)
    if p.n == 0:
        raise EmptyInputError("no points")
    _check(p.d, f)
    return float(np.mean(f(p.points)))


def hk_variation(f: TestFunction) -> float:
    """Hardy-Krause variation anchored at 1, summed over nonempty coordinate subsets."""
    jumps = []
    ends = []
    for g in f.factors:
        if not isinstance(g, Factor):
            raise UnsupportedError(f"unsupported factor {g!r}")
        g0, g1 = float(g(0.0)), float(g(1.0))
        jumps.append(abs(g1 - g0))
        ends.append(abs(g1))
    total = 0.0
    for r in range(1, f.d + 1):
        for u in itertools.combinations(range(f.d), r):
            term = 1.0
            for j in range(f.d):
                term *= jumps[j] if j in u else ends[j]
            total += term
    return total


def true_integral(m: Measure, f: TestFunction) -> float:
    """Closed-form ``int f dmu`` for supported (measure, factor) pairs."""
    _check(m.d, f)
    if isinstance(m, Uniform):
        return float(np.prod([g.uniform_mean() for g in f.factors]))
    if isinstance(m, ProductPower):
        out = 1.0
        for g, a in zip(f.factors, m.alphas):
            if g.kind == "power":
                out *= a / (a + g.params[0])
            elif g.kind == "affine":
                out *= g.params[0] + g.params[1] * a / (a + 1.0)
            else:
                raise UnsupportedError("exp factors have no closed form under product_power")
        return float(out)
    if isinstance(m, PiecewiseConstantDyadic):
        cells = 2**m.level
        edges = np.arange(cells + 1) / cells
        means = [np.array([g.uniform_mean(edges[i], edges[i + 1]) for i in range(cells)]) for g in f.factors]
        out = m.weights
        for v in reversed(means):
            out = out @ v
        return float(out)
    if isinstance(m, Discrete):
        return float(f(m.atom_points) @ m.weights)
    if isinstance(m, Mixture):
        return float(sum(w * true_integral(c, f) for w, c in zip(m.weights, m.components) if w > 0))
    if isinstance(m, Clayton2D):
        raise UnsupportedError("no closed-form integral under clayton2d; use reference_integral")
    raise UnsupportedError(f"no closed-form integral for {type(m).__name__}")


def has_true_integral(m: Measure, f: TestFunction) -> bool:
    try:
        true_integral(m, f)
    except UnsupportedError:
        return False
    return True


def reference_integral(m: Measure, f: TestFunction, n: int = 10**6, seed=0) -> tuple[float, float]:
    """Monte Carlo reference value and its standard error."""
    vals = f(sample(m, n, seed).points)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n))


@dataclass(frozen=True)
class KHRecord:
    estimate: float
    true_value: float
    error: float
    dstar: float
    variation: float
    bound: float
    satisfied: bool

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "true_value": self.true_value,
            "error": self.error,
            "dstar": self.dstar,
            "variation": self.variation,
            "bound": self.bound,
            "satisfied": self.satisfied,
        }


def kh_check(p, m: Measure, f: TestFunction) -> KHRecord:
    """Compare the QMC error with ``D*(p; m) * Var f``."""
    truth = true_integral(m, f)
    est = qmc_estimate(p, f)
    dstar = star_discrepancy(p, m).value
    var = hk_variation(f)
    err = abs(truth - est)
    bound = dstar * var
    return KHRecord(est, truth, err, dstar, var, bound, bool(err <= bound + KH_TOL))


@dataclass(frozen=True)
class MCRecord:
    rmse: float
    mean_abs_error: float
    reference: float
    reps: int
    n: int


def mc_baseline(m: Measure, f: TestFunction, n: int, reps: int, seed, reference: float | None = None) -> MCRecord:
    """Error of plain Monte Carlo with ``n`` i.i.d. points over ``reps`` repetitions.

    Repetition ``r`` uses a seed derived from ``(seed, r)``. Without an exact
    integral, pass ``reference`` (e.g. from :func:`reference_integral`).
    """
    if reps < 1:
        raise DomainError("reps must be >= 1")
    if n < 1:
        raise DomainError("n must be >= 1")
    _check(m.d, f)
    ref = true_integral(m, f) if reference is None else float(reference)
    errs = np.empty(reps)
    for r in range(reps):
        pts = sample(m, n, derive_seed(seed, r)).points
        errs[r] = float(np.mean(f(pts))) - ref
    return MCRecord(float(np.sqrt(np.mean(errs**2))), float(np.mean(np.abs(errs))), ref, reps, n)
