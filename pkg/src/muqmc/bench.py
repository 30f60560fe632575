"""Seeded benchmark sweeps over measures, sizes and coloring strategies."""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .coloring import parse_strategy, strategy_id
from .errors import DomainError, ParseError
from .measures import measure_from_dict
from .transference import GenerationConfig, generate, ledger_bound

THREADS_ENV = "MUQMC_THREADS"


def eq2_bound(N: int, d: int) -> float:
    """``63 sqrt(d) (2 + log2 N)**((3d+1)/2) / N``, the general-measure envelope on D*."""
    if N < 2:
        raise DomainError("eq2_bound needs N >= 2")
    if d < 1:
        raise DomainError("eq2_bound needs d >= 1")
    return 63.0 * math.sqrt(d) * (2.0 + math.log2(N)) ** ((3 * d + 1) / 2) / N


@dataclass(frozen=True)
class BenchRow:
    measure_id: str
    d: int
    N: int
    k: int
    strategy_id: str
    seed: int
    dstar: float
    n_times_dstar: float
    delta_max: int
    ledger_bound_normalized: float
    eq2_bound: float
    runtime_ms: float | None


COLUMNS = [f.name for f in fields(BenchRow)]


@dataclass(frozen=True)
class Sweep:
    measures: tuple  # of (id, measure dict)
    Ns: tuple
    strategies: tuple
    seeds: tuple
    k: int = 4
    best_of: int = 1
    padding_rule: str = "random"
    audit: bool = False

    def combos(self):
        for mid, mdoc in self.measures:
            for s in self.strategies:
                for seed in self.seeds:
                    for N in self.Ns:
                        yield (mid, mdoc, int(N), self.k, s, int(seed), self.best_of, self.padding_rule, self.audit)


def sweep_from_dict(doc) -> Sweep:
    """Parse a sweep config. ``measures`` entries are ``{"id": ..., "measure": {...}}``
    or bare measure objects (their ``type`` becomes the id)."""
    if not isinstance(doc, dict):
        raise ParseError("sweep: expected an object")
    try:
        ms = []
        for i, entry in enumerate(doc["measures"]):
            if "measure" in entry:
                mdoc, mid = entry["measure"], entry.get("id", entry["measure"].get("type", f"m{i}"))
            else:
                mdoc, mid = entry, entry.get("type", f"m{i}")
            measure_from_dict(mdoc, f"sweep.measures[{i}]")
            ms.append((str(mid), mdoc))
        strategies = tuple(doc.get("strategies", ["alt-axis0"]))
        for s in strategies:
            parse_strategy(s)
        Ns = tuple(int(n) for n in doc["N"])
        for n in Ns:
            if n < 2 or n & (n - 1):
                raise ParseError(f"sweep: N values must be powers of two >= 2, got {n}")
        return Sweep(
            measures=tuple(ms),
            Ns=Ns,
            strategies=strategies,
            seeds=tuple(int(s) for s in doc.get("seeds", [0])),
            k=int(doc.get("k", 4)),
            best_of=int(doc.get("best_of", 1)),
            padding_rule=str(doc.get("padding_rule", "random")),
            audit=bool(doc.get("audit", False)),
        )
    except KeyError as exc:
        raise ParseError(f"sweep: missing field {exc.args[0]!r}") from None


def _run_one(combo, timing: bool) -> BenchRow:
    mid, mdoc, N, k, sid, seed, best_of, rule, audit = combo
    m = measure_from_dict(mdoc)
    cfg = GenerationConfig(N=N, k=k, strategy=parse_strategy(sid, seed), seed=seed, best_of=best_of, audit=audit, padding_rule=rule)
    t0 = time.perf_counter()
    _, trace = generate(m, cfg)
    elapsed = (time.perf_counter() - t0) * 1000.0
    dstar = trace.Dk / N
    return BenchRow(
        measure_id=mid,
        d=m.d,
        N=N,
        k=k,
        strategy_id=strategy_id(cfg.strategy),
        seed=seed,
        dstar=dstar,
        n_times_dstar=N * dstar,
        delta_max=max(trace.deltas, default=0),
        ledger_bound_normalized=ledger_bound(trace) / N,
        eq2_bound=eq2_bound(N, m.d),
        runtime_ms=elapsed if timing else None,
    )


def worker_count(n_tasks: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    workers = os.cpu_count() or 1
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, min(workers, n_tasks))


def run_bench(sweep: Sweep, timing: bool = False, workers: int | None = None) -> list[BenchRow]:
    """One row per combination, in sweep order regardless of completion order."""
    combos = list(sweep.combos())
    workers = worker_count(len(combos)) if workers is None else workers
    if workers <= 1 or len(combos) <= 1:
        return [_run_one(c, timing) for c in combos]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, combos, [timing] * len(combos)))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def fit_rate(Ns, values):
    """Least-squares fit of ``log(value) = log c + beta log(log2 N)``.

    Returns ``(beta, c)`` or ``(None, None)`` with fewer than two usable points.
    """
    xs, ys = [], []
    for N, v in zip(Ns, values):
        if v > 0 and N >= 2:
            xs.append(math.log(math.log2(N)))
            ys.append(math.log(v))
    if len(set(xs)) < 2:
        return None, None
    beta, logc = np.polyfit(xs, ys, 1)
    return float(beta), float(math.exp(logc))


def summarize(rows) -> dict:
    """Per (measure, strategy) rate fits plus a cross-measure ranking at the largest N."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.measure_id, r.strategy_id), []).append(r)
    fits = []
    for (mid, sid), rs in groups.items():
        by_n: dict = {}
        for r in rs:
            by_n.setdefault(r.N, []).append(r.n_times_dstar)
        Ns = sorted(by_n)
        means = [float(np.mean(by_n[n])) for n in Ns]
        beta, c = fit_rate(Ns, means)
        d = rs[0].d
        fits.append(
            {
                "measure_id": mid,
                "strategy_id": sid,
                "d": d,
                "beta": beta,
                "c": c,
                "N": Ns,
                "mean_n_times_dstar": means,
                "reference_exponents": {"d_minus_half": d - 0.5, "d_minus_one": d - 1.0},
            }
        )
    ranking = {}
    for sid in dict.fromkeys(r.strategy_id for r in rows):
        sub = [r for r in rows if r.strategy_id == sid]
        top = max(r.N for r in sub)
        scores: dict = {}
        for r in sub:
            if r.N == top:
                scores.setdefault(r.measure_id, []).append(r.n_times_dstar)
        table = sorted(((float(np.mean(v)), mid) for mid, v in scores.items()), key=lambda t: (-t[0], t[1]))
        ranking[sid] = {"N": top, "hardest_first": [{"measure_id": mid, "mean_n_times_dstar": v} for v, mid in table]}
    return {"fits": fits, "ranking_at_largest_N": ranking}


def _unit(w):
    return (w / w.sum()).tolist()


def hell_sweep(d: int = 2, Ns=(16, 32, 64, 128), strategies=("dyadic+ls",), seeds=(0,), k: int = 4, seed: int = 0) -> Sweep:
    """Preset cross-measure sweep: is any measure harder to approximate than uniform?"""
    rng = np.random.default_rng(seed)
    measures = [
        ("uniform", {"type": "uniform", "d": d}),
        ("product_power_0.5", {"type": "product_power", "alphas": [0.5] * d}),
        ("product_power_3", {"type": "product_power", "alphas": [3.0] * d}),
        ("piecewise_dyadic_L2", {"type": "piecewise_dyadic", "d": d, "level": 2, "weights": _unit(rng.random(4**d) + 0.05)}),
        ("discrete_64", {"type": "discrete", "atoms": rng.random((64, d)).tolist(), "weights": [1.0 / 64] * 64}),
        (
            "mixture_uniform_atom",
            {
                "type": "mixture",
                "weights": [0.5, 0.5],
                "components": [{"type": "uniform", "d": d}, {"type": "discrete", "atoms": [[0.5] * d], "weights": [1.0]}],
            },
        ),
    ]
    if d == 2:
        measures.insert(3, ("clayton_theta4", {"type": "clayton2d", "theta": 4.0, "alphas": [1.0, 1.0]}))
    return Sweep(tuple(measures), tuple(Ns), tuple(strategies), tuple(seeds), k=k)
