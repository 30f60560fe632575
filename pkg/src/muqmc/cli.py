"""Command-line interface: ``muqmc <command> [options]``.

Exit codes: 0 success, 2 parse/config error, 3 budget error, 4 invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from .coloring import color, parse_strategy, strategy_id
from .discrepancy import combinatorial_disc, geometric_disc, star_discrepancy, star_discrepancy_lower_bound
from .errors import BudgetError, InvariantViolation, MuqmcError, UnsupportedError
from .io import load_coloring, load_measure, load_points, save_coloring, save_points, save_trace, write_json, _read_json
from .measures import sample
from .quadrature import has_true_integral, hk_variation, kh_check, parse_function, qmc_estimate, reference_integral
from .transference import GenerationConfig, generate, ledger_bound

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_INVARIANT = 0, 2, 3, 4


def _dump(doc, out=None):
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _need(args, name):
    if getattr(args, name) is None:
        raise argparse.ArgumentTypeError(f"--{name.replace('_', '-')} is required for this command")
    return getattr(args, name)


def cmd_sample(args):
    m = load_measure(_need(args, "measure"))
    p = sample(m, _need(args, "N"), args.seed)
    if args.out:
        save_points(args.out, p, header=args.header)
    else:
        for row in p.points:
            sys.stdout.write(",".join("%.17g" % v for v in row) + "\n")


def cmd_disc(args):
    m = load_measure(_need(args, "measure"))
    p = load_points(_need(args, "points"), d=m.d, header=args.header)
    if args.trials:
        doc = {"lower_bound": star_discrepancy_lower_bound(p, m, args.trials, args.seed), "trials": args.trials}
    else:
        rep = star_discrepancy(p, m)
        doc = rep.to_dict()
        doc["geometric"] = geometric_disc(p, m)
    _dump(doc, args.out)


def cmd_color(args):
    p = load_points(_need(args, "points"), header=args.header)
    if args.coloring:
        y = load_coloring(args.coloring, p.n)
        sid = "file"
    else:
        s = parse_strategy(args.strategy, args.seed)
        y = color(p, s)
        sid = strategy_id(s)
        if args.out:
            save_coloring(args.out, y)
    value, witness = combinatorial_disc(p, y)
    _dump({"strategy": sid, "n": p.n, "disc": value, "witness_corner": list(witness), "balance": int(y.astype(int).sum())},
          args.report)


def cmd_generate(args):
    m = load_measure(_need(args, "measure"))
    cfg = GenerationConfig(
        N=_need(args, "N"),
        k=args.k,
        strategy=parse_strategy(args.strategy, args.seed),
        seed=args.seed,
        best_of=args.best_of,
        audit=args.audit,
        padding_rule=args.padding,
    )
    p, trace = generate(m, cfg)
    out = _need(args, "out")
    save_points(out, p, header=args.header)
    trace_path = args.trace or str(Path(out).with_suffix("")) + ".trace.json"
    save_trace(trace_path, trace)
    bound = ledger_bound(trace)
    _dump(
        {
            "points": out,
            "trace": trace_path,
            "N": cfg.N,
            "k": cfg.k,
            "dstar": trace.Dk / cfg.N,
            "ledger_bound_normalized": bound / cfg.N,
            "deltas": trace.deltas,
            "audited": cfg.audited,
        },
        args.report,
    )


def cmd_integrate(args):
    m = load_measure(_need(args, "measure"))
    p = load_points(_need(args, "points"), d=m.d, header=args.header)
    f = parse_function(args.f)
    if has_true_integral(m, f):
        doc = kh_check(p, m, f).to_dict()
    else:
        truth, stderr = reference_integral(m, f, args.reference_n, args.seed)
        est = qmc_estimate(p, f)
        dstar = star_discrepancy(p, m).value
        var = hk_variation(f)
        doc = {
            "estimate": est,
            "true_value": truth,
            "true_value_stderr": stderr,
            "error": abs(est - truth),
            "dstar": dstar,
            "variation": var,
            "bound": dstar * var,
            "satisfied": None,
        }
    _dump(doc, args.out)


def _write_bench(rows, args):
    text = bench_mod.rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    summary = bench_mod.summarize(rows)
    if args.summary:
        write_json(args.summary, summary)
    return summary


def cmd_bench(args):
    sweep = bench_mod.sweep_from_dict(_read_json(args.sweep))
    rows = bench_mod.run_bench(sweep, timing=args.timing)
    _write_bench(rows, args)


def cmd_hell(args):
    sweep = bench_mod.hell_sweep(
        d=args.d,
        Ns=tuple(args.Ns),
        strategies=(args.strategy,),
        seeds=tuple(args.seeds),
        k=args.k,
        seed=args.seed,
    )
    rows = bench_mod.run_bench(sweep, timing=args.timing)
    summary = _write_bench(rows, args)
    if args.out:
        _dump(summary["ranking_at_largest_N"])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--measure", help="measure JSON file")
    common.add_argument("--points", help="point CSV file")
    common.add_argument("--out", help="output file (default stdout where applicable)")
    common.add_argument("--audit", action=argparse.BooleanOptionalAction, default=None,
                        help="measure and check every halving step (default: on up to 4096 initial points)")
    common.add_argument("--strategy", default="alt-axis0", help="coloring strategy id, e.g. alt-axis0, dyadic+ls")
    common.add_argument("--k", type=int, default=4, help="number of halvings")
    common.add_argument("--N", type=int, help="number of points")
    common.add_argument("--header", action="store_true", help="point CSV files carry a header row")

    parser = argparse.ArgumentParser(prog="muqmc", description="Low-discrepancy point sets for general measures.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="i.i.d. sample from a measure")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("disc", parents=[common], help="exact star discrepancy of a point file")
    p.add_argument("--trials", type=int, default=0, help="report the randomized lower bound instead")
    p.set_defaults(func=cmd_disc)

    p = sub.add_parser("color", parents=[common], help="color a point file and report its discrepancy")
    p.add_argument("--coloring", help="evaluate this coloring file instead of computing one")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_color)

    p = sub.add_parser("generate", parents=[common], help="run the halving pipeline")
    p.add_argument("--best-of", type=int, default=1, dest="best_of")
    p.add_argument("--padding", choices=("random", "greedy"), default="random")
    p.add_argument("--trace", help="trace JSON path (default <out>.trace.json)")
    p.add_argument("--report", help="write the JSON summary here instead of stdout")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("integrate", parents=[common], help="QMC estimate with Koksma-Hlawka check")
    p.add_argument("--f", required=True, help="product function, e.g. power:1,power:1")
    p.add_argument("--reference-n", type=int, default=10**6, dest="reference_n",
                   help="MC sample size for measures without a closed-form integral")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("bench", parents=[common], help="seeded benchmark sweep")
    p.add_argument("--sweep", required=True, help="sweep JSON file")
    p.add_argument("--summary", help="write rate fits and rankings as JSON")
    p.add_argument("--timing", action="store_true", help="fill runtime_ms (makes output non-reproducible)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("hell", parents=[common], help="cross-measure comparison experiment")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--Ns", type=int, nargs="+", default=[16, 32, 64, 128])
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    p.add_argument("--summary", help="write rate fits and rankings as JSON")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_hell, strategy="dyadic+ls")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except InvariantViolation as exc:
        print(f"muqmc: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except BudgetError as exc:
        print(f"muqmc: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (MuqmcError, argparse.ArgumentTypeError, OSError, UnsupportedError) as exc:
        print(f"muqmc: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
