import csv
import json

import numpy as np
import pytest

from muqmc import cli
from muqmc.bench import COLUMNS, BenchRow, Sweep, eq2_bound, fit_rate, rows_to_csv, run_bench, summarize, sweep_from_dict
from muqmc.coloring import color, parse_strategy
from muqmc.discrepancy import combinatorial_disc, star_discrepancy
from muqmc.errors import DimensionError, DomainError, InvariantViolation, ParseError
from muqmc.io import load_coloring, load_measure, load_points, load_trace, save_coloring, save_measure, save_points, save_trace
from muqmc.measures import Clayton2D, Mixture, ProductPower, Uniform, Discrete, measure_to_dict, sample
from muqmc.quadrature import kh_check, parse_function
from muqmc.transference import GenerationConfig, generate


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


# ---- io -------------------------------------------------------------------


def test_points_roundtrip(tmp_path):
    p = sample(Uniform(3), 100, seed=1)
    f = tmp_path / "p.csv"
    save_points(f, p)
    assert np.array_equal(load_points(f).points, p.points)
    save_points(f, p, header=True)
    assert np.array_equal(load_points(f, header=True).points, p.points)


def test_points_parse_errors(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("0.1,0.2\n0.3,0.4,0.5\n")
    with pytest.raises(ParseError, match="line 2"):
        load_points(f, d=2)
    f.write_text("0.1,0.2\n0.3,abc\n")
    with pytest.raises(ParseError) as exc:
        load_points(f)
    assert (exc.value.line, exc.value.column) == (2, 2)
    f.write_text("0.1,1.2\n")
    with pytest.raises(ParseError):
        load_points(f)
    f.write_text("")
    with pytest.raises(ParseError):
        load_points(f)


def test_coloring_roundtrip(tmp_path):
    f = tmp_path / "y.csv"
    y = np.array([1, -1, -1, 1], dtype=np.int8)
    save_coloring(f, y)
    assert np.array_equal(load_coloring(f, 4), y)
    with pytest.raises(DimensionError):
        load_coloring(f, 5)
    f.write_text("1\n0\n")
    with pytest.raises(ParseError, match="line 2"):
        load_coloring(f)


def test_measure_roundtrip(tmp_path):
    m = Mixture((ProductPower((2.0, 3.0)), Clayton2D(1.0, (1.0, 2.0)), Discrete([[0.5, 0.25]])), (0.2, 0.3, 0.5))
    f = tmp_path / "m.json"
    save_measure(f, m)
    assert measure_to_dict(load_measure(f)) == measure_to_dict(m)


def test_measure_file_errors(tmp_path):
    with pytest.raises(ParseError, match='"type"'):
        load_measure(write(tmp_path / "m.json", {"type": "weird"}))
    (tmp_path / "broken.json").write_text('{"type": "uniform",\n "d": }')
    with pytest.raises(ParseError) as exc:
        load_measure(tmp_path / "broken.json")
    assert exc.value.line == 2


def test_trace_roundtrip(tmp_path):
    _, t = generate(Uniform(2), GenerationConfig(N=8, k=2, seed=1))
    f = tmp_path / "t.json"
    save_trace(f, t)
    back = load_trace(f)
    assert back.to_dict() == t.to_dict()


# ---- bench ----------------------------------------------------------------


def test_eq2_examples():
    assert eq2_bound(4, 1) == 252.0
    assert eq2_bound(1024, 1) == 8.859375
    assert eq2_bound(4, 2) == pytest.approx(63 * np.sqrt(2) * 32, rel=1e-15)
    with pytest.raises(DomainError):
        eq2_bound(1, 1)


def test_bench_examples():
    rows = run_bench(Sweep((("u", {"type": "uniform", "d": 1}),), (16,), ("alt-axis0",), (0,), k=2))
    assert len(rows) == 1
    atom = Sweep((("atom", {"type": "discrete", "atoms": [[0.3, 0.3]]}),), (2, 4, 8), ("dyadic",), (0,), k=2)
    assert [r.dstar for r in run_bench(atom)] == [0.0, 0.0, 0.0]


def test_bench_row_invariants():
    sweep = Sweep((("pp", {"type": "product_power", "alphas": [2.0, 0.5]}),), (4, 8), ("alt-lex", "random"), (0, 1), k=2)
    rows = run_bench(sweep)
    assert len(rows) == 8
    for r in rows:
        assert r.dstar >= 0
        assert r.n_times_dstar == r.N * r.dstar
        assert r.n_times_dstar <= r.ledger_bound_normalized * r.N + 1e-9
        assert r.eq2_bound == eq2_bound(r.N, r.d)
        assert r.runtime_ms is None
    assert [(r.strategy_id, r.seed, r.N) for r in rows[:4]] == [("alt-lex", 0, 4), ("alt-lex", 0, 8), ("alt-lex", 1, 4), ("alt-lex", 1, 8)]
    text = rows_to_csv(rows)
    assert text.splitlines()[0].split(",") == COLUMNS
    assert list(csv.reader(text.splitlines()))[1][-1] == ""


def test_bench_parallel_matches_sequential():
    sweep = Sweep((("u", {"type": "uniform", "d": 2}),), (4, 8, 16), ("alt-hilbert",), (0, 1), k=2)
    assert run_bench(sweep, workers=1) == run_bench(sweep, workers=2)


def test_sweep_parsing():
    s = sweep_from_dict({"measures": [{"type": "uniform", "d": 1}], "N": [4, 8]})
    assert s.measures[0][0] == "uniform" and s.Ns == (4, 8) and s.strategies == ("alt-axis0",)
    with pytest.raises(ParseError, match="powers of two"):
        sweep_from_dict({"measures": [{"type": "uniform", "d": 1}], "N": [6]})
    with pytest.raises(ParseError, match="N"):
        sweep_from_dict({"measures": [{"type": "uniform", "d": 1}]})
    with pytest.raises(ParseError):
        sweep_from_dict({"measures": [{"type": "uniform", "d": 1}], "N": [4], "strategies": ["bogus"]})


def test_fit_rate_recovers_exponent():
    Ns = [16, 32, 64, 128, 256]
    vals = [0.7 * np.log2(n) ** 1.5 for n in Ns]
    beta, c = fit_rate(Ns, vals)
    assert beta == pytest.approx(1.5) and c == pytest.approx(0.7)
    assert fit_rate([16], [1.0]) == (None, None)


def test_summary_ranking():
    def row(mid, N, v):
        return BenchRow(mid, 2, N, 2, "s", 0, v / N, v, 1, v / N, eq2_bound(N, 2), None)

    rows = [row("a", 8, 1.0), row("a", 16, 2.0), row("b", 8, 1.0), row("b", 16, 3.0)]
    s = summarize(rows)
    assert [e["measure_id"] for e in s["ranking_at_largest_N"]["s"]["hardest_first"]] == ["b", "a"]
    fit = [f for f in s["fits"] if f["measure_id"] == "a"][0]
    assert fit["reference_exponents"] == {"d_minus_half": 1.5, "d_minus_one": 1.0}


# ---- cli ------------------------------------------------------------------


@pytest.fixture
def files(tmp_path):
    m = {"type": "product_power", "alphas": [2.0, 2.0]}
    return tmp_path, write(tmp_path / "m.json", m), ProductPower((2.0, 2.0))


def test_cli_sample_and_disc(files, capsys):
    tmp, mpath, m = files
    out = str(tmp / "p.csv")
    assert cli.main(["sample", "--measure", mpath, "--N", "20", "--seed", "4", "--out", out]) == 0
    assert load_points(out) == sample(m, 20, 4)
    assert cli.main(["disc", "--measure", mpath, "--points", out]) == 0
    doc = json.loads(capsys.readouterr().out)
    rep = star_discrepancy(load_points(out), m)
    assert doc["value"] == rep.value and doc["witness_corner"] == list(rep.witness_corner)
    assert cli.main(["disc", "--measure", mpath, "--points", out, "--trials", "1000"]) == 0
    assert json.loads(capsys.readouterr().out)["lower_bound"] <= rep.value


def test_cli_color(files, capsys):
    tmp, mpath, m = files
    pts = str(tmp / "p.csv")
    save_points(pts, sample(m, 30, 0))
    ypath = str(tmp / "y.csv")
    assert cli.main(["color", "--points", pts, "--strategy", "dyadic+ls", "--seed", "3", "--out", ypath]) == 0
    doc = json.loads(capsys.readouterr().out)
    y = color(load_points(pts), parse_strategy("dyadic+ls", 3))
    assert np.array_equal(load_coloring(ypath), y)
    assert doc["disc"] == combinatorial_disc(load_points(pts), y)[0]
    assert cli.main(["color", "--points", pts, "--coloring", ypath]) == 0
    assert json.loads(capsys.readouterr().out)["disc"] == doc["disc"]


def test_cli_generate_matches_library(files, capsys):
    tmp, mpath, m = files
    out = str(tmp / "g.csv")
    argv = ["generate", "--measure", mpath, "--N", "16", "--k", "3", "--strategy", "alt-hilbert", "--seed", "5", "--out", out]
    assert cli.main(argv) == 0
    doc = json.loads(capsys.readouterr().out)
    p, t = generate(m, GenerationConfig(N=16, k=3, strategy=parse_strategy("alt-hilbert", 5), seed=5))
    assert load_points(out) == p
    assert load_trace(doc["trace"]).to_dict() == t.to_dict()
    assert doc["dstar"] == t.Dk / 16


def test_cli_integrate(files, capsys):
    tmp, mpath, m = files
    pts = str(tmp / "p.csv")
    p, _ = generate(m, GenerationConfig(N=16, k=2, seed=0))
    save_points(pts, p)
    assert cli.main(["integrate", "--measure", mpath, "--points", pts, "--f", "power:1,power:1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc == kh_check(p, m, parse_function("power:1,power:1")).to_dict()
    assert set(doc) == {"estimate", "true_value", "error", "dstar", "variation", "bound", "satisfied"}
    cpath = write(tmp / "c.json", {"type": "clayton2d", "theta": 2.0})
    assert cli.main(["integrate", "--measure", cpath, "--points", pts, "--f", "power:1,power:1", "--reference-n", "10000"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["satisfied"] is None and doc["true_value_stderr"] > 0


def test_cli_bench_and_hell(tmp_path, capsys):
    sweep = write(tmp_path / "s.json", {"measures": [{"id": "u", "measure": {"type": "uniform", "d": 1}}], "N": [4, 8], "k": 2})
    out, summ = str(tmp_path / "b.csv"), str(tmp_path / "s.json.out")
    assert cli.main(["bench", "--sweep", sweep, "--out", out, "--summary", summ]) == 0
    rows = list(csv.DictReader(open(out)))
    assert [r["N"] for r in rows] == ["4", "8"]
    assert "fits" in json.load(open(summ))
    assert cli.main(["hell", "--d", "1", "--Ns", "4", "8", "--k", "1", "--strategy", "alt-axis0", "--out", out]) == 0
    ids = {r["measure_id"] for r in csv.DictReader(open(out))}
    assert "uniform" in ids and "discrete_64" in ids
    assert "alt-axis0" in json.loads(capsys.readouterr().out)


def test_cli_exit_codes(tmp_path, monkeypatch, capsys):
    bad = write(tmp_path / "bad.json", {"type": "nope"})
    assert cli.main(["sample", "--measure", bad, "--N", "3"]) == 2
    assert cli.main(["sample", "--N", "3"]) == 2
    m4 = write(tmp_path / "u4.json", {"type": "uniform", "d": 4})
    pts = str(tmp_path / "p4.csv")
    save_points(pts, sample(Uniform(4), 120, 0))
    assert cli.main(["disc", "--measure", m4, "--points", pts]) == 3
    m1 = write(tmp_path / "u1.json", {"type": "uniform", "d": 1})

    def broken(m, cfg):
        raise InvariantViolation("step 0: forced")

    monkeypatch.setattr(cli, "generate", broken)
    assert cli.main(["generate", "--measure", m1, "--N", "4", "--k", "1", "--audit", "--out", str(tmp_path / "o.csv")]) == 4
    assert "invariant" in capsys.readouterr().err
