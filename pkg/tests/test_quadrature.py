import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from muqmc.errors import DimensionError, EmptyInputError, ParseError, UnsupportedError
from muqmc.measures import Clayton2D, Discrete, Mixture, PiecewiseConstantDyadic, ProductPower, Uniform, sample
from muqmc.quadrature import (
    affine,
    exponential,
    hk_variation,
    kh_check,
    mc_baseline,
    parse_function,
    power,
    product,
    qmc_estimate,
    reference_integral,
    true_integral,
)
from muqmc.transference import GenerationConfig, generate

X = parse_function("power:1")
XY = parse_function("power:1,power:1")
ONE = parse_function("power:0")


def test_qmc_examples():
    assert qmc_estimate([[0.25], [0.75]], X) == 0.5
    assert qmc_estimate(np.random.default_rng(0).random((7, 1)), ONE) == 1.0
    assert qmc_estimate([[0.5, 0.5]], XY) == 0.25
    with pytest.raises(EmptyInputError):
        qmc_estimate(np.zeros((0, 1)), X)
    with pytest.raises(DimensionError):
        qmc_estimate([[0.5]], XY)


def test_qmc_order_invariant():
    p = np.random.default_rng(1).random((20, 2))
    f = parse_function("exp:1.5,affine:2:-1")
    assert qmc_estimate(p, f) == pytest.approx(qmc_estimate(p[::-1], f), abs=1e-15)


def test_variation_examples():
    assert hk_variation(X) == 1.0
    assert hk_variation(XY) == 3.0
    assert hk_variation(ONE) == 0.0
    # 1 - x vanishes at the anchor, so the subset {axis 1} contributes nothing
    f = parse_function("affine:1:-1,power:1")
    assert hk_variation(f) == pytest.approx(1 * 1 + 0 * 1 + 1 * 1)


power_affine = st.one_of(
    st.floats(0.0, 4.0).map(power),
    st.tuples(st.floats(-2, 2), st.floats(-2, 2)).map(lambda ab: affine(*ab)),
)
factors = st.one_of(power_affine, st.floats(-2, 2).map(exponential))


@settings(max_examples=100, deadline=None)
@given(st.lists(factors, min_size=1, max_size=3))
def test_variation_properties(fs):
    f = product(*fs)
    v = hk_variation(f)
    assert v >= 0
    constant = all(abs(float(g(1.0)) - float(g(0.0))) == 0 for g in fs)
    if constant:
        assert v == 0


def test_variation_matches_finite_differences():
    # d=2: sum over u of the u-mixed variation with the other coordinates at 1
    f = parse_function("exp:0.7,affine:0.5:2")
    g = np.linspace(0, 1, 401)
    v1 = np.abs(np.diff(f(np.c_[g, np.ones_like(g)]))).sum()
    v2 = np.abs(np.diff(f(np.c_[np.ones_like(g), g]))).sum()
    G = f(np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2)).reshape(401, 401)
    v12 = np.abs(np.diff(np.diff(G, axis=0), axis=1)).sum()
    assert hk_variation(f) == pytest.approx(v1 + v2 + v12, rel=1e-9)


def test_true_integral_examples():
    assert true_integral(Uniform(1), X) == 0.5
    assert true_integral(ProductPower((2.0,)), X) == pytest.approx(2 / 3)
    assert true_integral(Discrete([[0.5]], [1.0]), parse_function("power:2")) == 0.25
    with pytest.raises(UnsupportedError):
        true_integral(Clayton2D(1.0, (1.0, 1.0)), XY)


def test_true_integral_against_mc():
    cases = [
        (Uniform(2), parse_function("exp:1,affine:1:2")),
        (ProductPower((0.5, 3.0)), parse_function("power:2,affine:1:-0.5")),
        (PiecewiseConstantDyadic(2, 2, np.arange(1, 17) / 136), parse_function("exp:-1,power:1.5")),
        (Mixture((Uniform(1), Discrete([[0.2]])), (0.6, 0.4)), parse_function("exp:2")),
    ]
    for m, f in cases:
        est, se = reference_integral(m, f, n=400_000, seed=8)
        assert abs(est - true_integral(m, f)) <= 5 * se


def test_empirical_measure_is_exact():
    p = np.random.default_rng(5).random((9, 2))
    m = Discrete(p, np.full(9, 1 / 9))
    f = parse_function("exp:1.2,power:3")
    assert kh_check(p, m, f).error == pytest.approx(0.0, abs=1e-15)


def test_kh_examples():
    r = kh_check([[0.25], [0.75]], Uniform(1), X)
    assert r.error == 0.0 and r.bound == 0.25 and r.satisfied
    r = kh_check([[0.1], [0.3]], Uniform(1), ONE)
    assert r.error == 0.0 and r.bound == 0.0 and r.satisfied


def test_kh_golden():
    m = ProductPower((2.0, 2.0))
    p, _ = generate(m, GenerationConfig(N=64, k=4, seed=7))
    r = kh_check(p, m, XY)
    assert r.satisfied
    assert r.error == pytest.approx(0.018588389598311217, abs=1e-14)
    assert r.bound == pytest.approx(0.37888914061135326, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 40), fs=st.lists(power_affine, min_size=2, max_size=2))
def test_kh_holds_for_random_sets(seed, n, fs):
    m = ProductPower((2.0, 0.5))
    assert kh_check(sample(m, n, seed), m, product(*fs)).satisfied


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 40), fs=st.lists(factors, min_size=2, max_size=2))
def test_kh_holds_uniform_all_factors(seed, n, fs):
    assert kh_check(sample(Uniform(2), n, seed), Uniform(2), product(*fs)).satisfied


def test_mc_examples():
    atom = Discrete([[0.3]], [1.0])
    assert mc_baseline(atom, parse_function("exp:2"), 5, 10, seed=0).rmse == pytest.approx(0.0, abs=1e-15)
    assert mc_baseline(Uniform(2), parse_function("power:0,power:0"), 7, 10, seed=0).rmse == 0.0
    r = mc_baseline(Uniform(1), X, 1, 10**4, seed=2024)
    assert abs(r.rmse - 1 / math.sqrt(12)) <= 0.05 / math.sqrt(12)
    assert r.rmse == pytest.approx(0.28728266139514735, abs=1e-15)


def test_mc_deterministic_and_reference():
    m = Clayton2D(2.0, (1.0, 1.0))
    ref, se = reference_integral(m, XY, 10**6, seed=1)
    a = mc_baseline(m, XY, 32, 50, seed=3, reference=ref)
    b = mc_baseline(m, XY, 32, 50, seed=3, reference=ref)
    assert a == b
    assert se < 1e-3
    # positive dependence pushes E[xy] above the independent value 1/4
    assert ref > 0.25 + 10 * se


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_function("sin:1")
    with pytest.raises(ParseError):
        parse_function("power:a")
    assert parse_function("affine:1:2,exp:0.5").label() == "affine:1:2,exp:0.5"
