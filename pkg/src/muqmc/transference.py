"""Halving pipeline turning a large sampled set into ``N`` low-discrepancy points.

Start from ``2**k * N`` i.i.d. samples. At each step, color the current set,
keep the smaller color class whole, and top it up to half size from the
larger class. If the coloring has combinatorial discrepancy ``delta`` on
anchored boxes (the full cube included), the unnormalized discrepancy obeys
``D_next <= D / 2 + delta``. Unrolling gives the ledger certificate
``D_k <= D_0 / 2**k + sum_i delta_i / 2**(k-1-i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._seeding import derive_seed
from .coloring import AlternatingOrder, color, reseed, strategy_id, strategy_to_dict
from .discrepancy import (
    MAX_CORNERS,
    combinatorial_disc,
    critical_grid,
    geometric_disc,
    star_discrepancy,
    star_discrepancy_lower_bound,
)
from .errors import BudgetError, DomainError, IncompleteTraceError, InvariantViolation, ParityError
from .measures import Measure, measure_to_dict, sample
from .pointset import PointSet, as_coloring, as_pointset

STEP_TOL = 1e-9
AUDIT_DEFAULT_MAX_N = 4096
LOWER_BOUND_TRIALS = 10**5


@dataclass(frozen=True)
class HalvingStep:
    index: int
    size_before: int
    delta: int
    minority_size: int
    padding_count: int
    kept_indices: tuple

    @property
    def size_after(self) -> int:
        return self.size_before // 2

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "size_before": self.size_before,
            "size_after": self.size_after,
            "delta": self.delta,
            "minority_size": self.minority_size,
            "padding_count": self.padding_count,
            "kept_indices": list(self.kept_indices),
        }


@dataclass(frozen=True)
class GenerationConfig:
    N: int
    k: int = 4
    strategy: object = field(default_factory=AlternatingOrder)
    seed: int = 0
    best_of: int = 1
    audit: bool | None = None
    padding_rule: str = "random"

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("N must be >= 1")
        if self.k < 0:
            raise DomainError("k must be >= 0")
        if self.best_of < 1:
            raise DomainError("best_of must be >= 1")
        if self.padding_rule not in ("random", "greedy"):
            raise DomainError(f"unknown padding rule {self.padding_rule!r}")

    @property
    def initial_size(self) -> int:
        return self.N * 2**self.k

    @property
    def audited(self) -> bool:
        if self.audit is None:
            return self.initial_size <= AUDIT_DEFAULT_MAX_N
        return bool(self.audit)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "k": self.k,
            "strategy": strategy_id(self.strategy),
            "strategy_detail": strategy_to_dict(self.strategy),
            "seed": self.seed,
            "best_of": self.best_of,
            "audit": self.audited,
            "padding_rule": self.padding_rule,
        }


@dataclass(frozen=True)
class TransferenceTrace:
    """Per-step record of a run.

    ``D0`` and ``Dk`` are the measured unnormalized discrepancies of the
    initial and final sets; ``Di`` holds every intermediate one when the run
    was audited.
    """

    k: int
    N: int
    steps: tuple
    D0: float | None
    Dk: float | None = None
    Di: tuple | None = None
    config: dict | None = None
    seeds: dict | None = None

    @property
    def deltas(self) -> list:
        return [s.delta for s in self.steps]

    @property
    def ledger_bound(self) -> float:
        return ledger_bound(self)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "N": self.N,
            "steps": [s.to_dict() for s in self.steps],
            "D0": self.D0,
            "Di": list(self.Di) if self.Di is not None else None,
            "Dk": self.Dk,
            "ledger_bound": ledger_bound(self) if self.D0 is not None else None,
            "config": self.config,
            "seeds": self.seeds,
        }


def ledger_bound(t: TransferenceTrace) -> float:
    """``D0 / 2**k + sum_i delta_i / 2**(k-1-i)`` (unnormalized)."""
    if t.D0 is None:
        raise IncompleteTraceError("trace has no measured D0")
    k = t.k
    if len(t.steps) != k:
        raise IncompleteTraceError(f"trace has {len(t.steps)} steps, expected {k}")
    total = t.D0 / 2**k
    for i, s in enumerate(t.steps):
        total += s.delta / 2 ** (k - 1 - i)
    return total


def _candidate_seed(seed, r: int) -> int:
    return seed if r == 0 else derive_seed(seed, 0x1A17, r)


def initial_approximation(m: Measure, size: int, seed, best_of: int = 1, require_exact: bool = False) -> PointSet:
    """Best of ``best_of`` i.i.d. samples of ``size`` points, ranked by star discrepancy.

    Candidate 0 is exactly ``sample(m, size, seed)``. Ranking is exact while the
    critical grid fits the budget and falls back to the randomized lower
    bound otherwise (or raises :class:`BudgetError` if ``require_exact``).
    """
    if size < 1:
        raise DomainError("size must be >= 1")
    if best_of < 1:
        raise DomainError("best_of must be >= 1")
    first = sample(m, size, _candidate_seed(seed, 0))
    if best_of == 1:
        return first
    exact = critical_grid(first, m).size <= MAX_CORNERS
    if not exact and require_exact:
        raise BudgetError("initial set is too large for an exact discrepancy evaluation")
    best, best_val = None, math.inf
    for r in range(best_of):
        cand = first if r == 0 else sample(m, size, _candidate_seed(seed, r))
        if exact:
            try:
                val = star_discrepancy(cand, m).value
            except BudgetError:
                if require_exact:
                    raise
                val = star_discrepancy_lower_bound(cand, m, LOWER_BOUND_TRIALS, derive_seed(seed, 0x10B, r))
        else:
            val = star_discrepancy_lower_bound(cand, m, LOWER_BOUND_TRIALS, derive_seed(seed, 0x10B, r))
        if val < best_val:
            best, best_val = cand, val
    return best


def _greedy_padding(p: PointSet, kept: list, pool: np.ndarray, count: int, m: Measure) -> list:
    chosen = list(kept)
    pool = list(pool)
    for _ in range(count):
        scores = []
        for c in pool:
            trial = sorted(chosen + [c])
            scores.append(star_discrepancy(p.take(trial), m).value)
        pick = pool.pop(int(np.argmin(scores)))
        chosen.append(pick)
    return chosen


def halving_step(p, y, rule: str = "random", seed=0, m: Measure | None = None, index: int = 0):
    """Halve ``p`` guided by coloring ``y``.

    The smaller color class is kept whole (a tie keeps the ``+1`` class) and
    topped up to ``n / 2`` points from the other class, either uniformly at
    random or greedily by exact star discrepancy (``rule="greedy"``, needs
    ``m``). Kept points stay in input order.
    """
    p = as_pointset(p)
    y = as_coloring(y, p.n)
    n = p.n
    if n % 2:
        raise ParityError(f"cannot halve an odd number of points ({n})")
    plus = np.flatnonzero(y == 1)
    minus = np.flatnonzero(y == -1)
    keep_sign = 1 if plus.size <= minus.size else -1
    minority, majority = (plus, minus) if keep_sign == 1 else (minus, plus)
    pad = n // 2 - minority.size
    if pad == 0:
        chosen = minority
    elif rule == "random":
        rng = np.random.default_rng(seed)
        chosen = np.concatenate([minority, rng.choice(majority, size=pad, replace=False)])
    elif rule == "greedy":
        if m is None:
            raise DomainError("greedy padding needs the target measure")
        chosen = np.asarray(_greedy_padding(p, list(minority), majority, pad, m))
    else:
        raise DomainError(f"unknown padding rule {rule!r}")
    kept = np.sort(chosen)
    delta, _ = combinatorial_disc(p, y)
    step = HalvingStep(
        index=index,
        size_before=n,
        delta=int(delta),
        minority_size=int(minority.size),
        padding_count=int(pad),
        kept_indices=tuple(int(i) for i in kept),
    )
    return p.take(kept), step


def check_step(step: HalvingStep, D_before: float | None = None, D_after: float | None = None):
    """Raise :class:`InvariantViolation` if a step breaks a proven bound."""
    if step.padding_count > math.ceil(step.delta / 2):
        raise InvariantViolation(f"step {step.index}: padding {step.padding_count} exceeds ceil(delta/2) with delta={step.delta}")
    if len(step.kept_indices) != step.size_before // 2:
        raise InvariantViolation(f"step {step.index}: kept {len(step.kept_indices)} of {step.size_before} points")
    if D_before is not None and D_after is not None and D_after > D_before / 2 + step.delta + STEP_TOL:
        raise InvariantViolation(
            f"step {step.index}: D_after={D_after!r} > D_before/2 + delta = {D_before / 2 + step.delta!r}"
        )


def generate(m: Measure, cfg: GenerationConfig):
    """Run the halving pipeline; returns the final ``N`` points and the trace.

    With auditing on, every intermediate discrepancy is measured and each
    step inequality is checked; a failure raises :class:`InvariantViolation`.
    """
    audit = cfg.audited
    size = cfg.initial_size
    P = initial_approximation(m, size, cfg.seed, cfg.best_of, require_exact=audit)
    D0 = geometric_disc(P, m)
    Di = [D0]
    steps = []
    step_seeds = []
    for i in range(cfg.k):
        s_seed = derive_seed(cfg.seed, 0x57E9, i)
        step_seeds.append(s_seed)
        y = color(P, reseed(cfg.strategy, s_seed))
        P_next, step = halving_step(P, y, cfg.padding_rule, derive_seed(s_seed, 0x9AD), m=m, index=i)
        if audit:
            D_next = geometric_disc(P_next, m)
            check_step(step, Di[-1], D_next)
            Di.append(D_next)
        else:
            check_step(step)
        steps.append(step)
        P = P_next
    Dk = Di[-1] if audit else (D0 if cfg.k == 0 else geometric_disc(P, m))
    trace = TransferenceTrace(
        k=cfg.k,
        N=cfg.N,
        steps=tuple(steps),
        D0=D0,
        Dk=Dk,
        Di=tuple(Di) if audit else None,
        config=dict(cfg.to_dict(), measure=measure_to_dict(m)),
        seeds={"initial": cfg.seed, "steps": step_seeds},
    )
    bound = ledger_bound(trace)
    if Dk > bound + STEP_TOL:
        raise InvariantViolation(f"final D_k={Dk!r} exceeds the ledger bound {bound!r}")
    return P, trace
