import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfdecay.constructions import gaussian_width, width_ratio_limit
from tfdecay.errors import AliasError, TruncationError
from tfdecay.hermite import (Grid, HermiteSeries, SampledFunction, analyze, fourier_samples,
                             fourier_series, hermite_eval, hermite_log_abs, hermite_table,
                             multi_indices, synthesize, synthesize_at)


def rodrigues(n: int, x: Fraction) -> float:
    """h_n(x) from exact integer physicists' Hermite coefficients."""
    prev, cur = [1], [0, 2]
    if n == 0:
        poly = prev
    else:
        for k in range(1, n):
            nxt = [0] + [2 * c for c in cur]
            for i, c in enumerate(prev):
                nxt[i] -= 2 * k * c
            prev, cur = cur, nxt
        poly = cur
    val = sum(Fraction(c) * x**i for i, c in enumerate(poly))
    xf = float(x)
    return float(val) * math.exp(-xf * xf / 2) / math.sqrt(2**n * math.factorial(n) * math.sqrt(math.pi))


def test_rodrigues_oracle():
    assert hermite_eval(6, 1.3) == pytest.approx(rodrigues(6, Fraction(13, 10)), abs=1e-12)
    for n in (0, 1, 7, 15):
        assert hermite_eval(n, -0.7) == pytest.approx(rodrigues(n, Fraction(-7, 10)), abs=1e-12)


def test_base_values():
    assert hermite_eval(0, 0.0) == pytest.approx(math.pi ** -0.25, rel=1e-15)
    assert hermite_eval(1, 0.0) == 0.0


def test_no_overflow_large_order():
    v = hermite_eval(10_000, 150.0)
    assert np.isfinite(v) and abs(v) <= 1.0
    assert np.isfinite(hermite_log_abs(10_000, 200.0))


def test_analyze_unit_vector():
    beta = 5
    s = HermiteSeries.from_dict(1, {beta: 1.0})
    f = synthesize(s, Grid.for_order(20))
    out = analyze(f, 20).values()
    expect = np.zeros(21)
    expect[beta] = 1.0
    assert np.max(np.abs(out - expect)) < 1e-9


def test_analyze_first_hermite():
    grid = Grid.for_order(10)
    f = SampledFunction.from_callable(lambda x: x * np.exp(-x * x / 2), grid)
    v = analyze(f, 10).values()
    assert v[1] == pytest.approx(math.pi**0.25 / math.sqrt(2), abs=1e-12)
    assert np.max(np.abs(np.delete(v, 1))) < 1e-12


def test_gaussian_width_parity_and_ratio():
    b = 0.3
    s = gaussian_width(b, 44)
    H = s.values().real
    assert np.max(np.abs(H[1::2])) < 1e-14
    q = (1 - 2 * b) / (1 + 2 * b)
    # exact finite ratio, tending to q; quadrature noise sits near 1e-16 max|H|
    for n in range(0, 15):
        noise = 1e-15 * np.abs(H).max() / abs(H[2 * n + 2])
        exact = q * math.sqrt((2 * n + 1) / (2 * n + 2))
        assert H[2 * n + 2] / H[2 * n] == pytest.approx(exact, rel=max(1e-12, noise))
    assert width_ratio_limit(s, n_hi=20) == pytest.approx(0.25, abs=1e-6)


def test_synthesize_gaussian():
    grid = Grid(2, 4.0, 33)
    f = synthesize(HermiteSeries.from_dict(2, {(0, 0): 1.0}), grid)
    X, Y = grid.mesh()
    assert np.allclose(f.values, math.pi**-0.5 * np.exp(-(X**2 + Y**2) / 2), atol=1e-15)


def test_synthesize_diagonal_at_origin():
    s = HermiteSeries.from_dict(2, {(n, n): 1.0 for n in range(4)})
    val = synthesize_at(s, [[0.0, 0.0]])[0]
    expect = sum(hermite_eval(n, 0.0) ** 2 for n in (0, 2))
    assert val.real == pytest.approx(expect, rel=1e-14)


def test_round_trip_random():
    rng = np.random.default_rng(7)
    c = rng.normal(size=33) + 1j * rng.normal(size=33)
    s = HermiteSeries.from_values(1, np.arange(33), c)
    back = analyze(synthesize(s, Grid.for_order(32)), 32).values()
    assert np.max(np.abs(back - c)) / np.max(np.abs(c)) < 1e-8


def test_fourier_examples():
    s = HermiteSeries.from_dict(1, {0: 1.0})
    assert fourier_series(s).lookup(0) == 1.0
    s2 = HermiteSeries.from_dict(2, {(1, 1): 1.0})
    assert fourier_series(s2).lookup((1, 1)) == pytest.approx(-1.0)


def test_fourier_against_quadrature():
    rng = np.random.default_rng(3)
    s = HermiteSeries.from_values(1, np.arange(17), rng.normal(size=17) + 1j * rng.normal(size=17))
    grid = Grid(1, 12.0, 241)
    direct = fourier_samples(synthesize(s, grid))
    spectral = synthesize(fourier_series(s), grid)
    assert np.max(np.abs(direct.values - spectral.values)) < 1e-6


def test_alias_and_truncation_guards():
    coarse = Grid(1, 10.0, 21)
    f = synthesize(HermiteSeries.from_dict(1, {0: 1.0}), coarse)
    with pytest.raises(AliasError):
        analyze(f, 40)
    narrow = Grid(1, 2.0, 81)
    g = synthesize(HermiteSeries.from_dict(1, {0: 1.0}), narrow)
    with pytest.raises(TruncationError):
        analyze(g, 10)


def test_grid_shape():
    g = Grid.for_order(30, 2)
    assert g.axis[0] == -g.axis[-1]
    assert g.delta * (g.points - 1) == pytest.approx(2 * g.R)


def test_multi_index_order_graded():
    idx = multi_indices(2, 3)
    deg = idx.sum(axis=1)
    assert np.all(np.diff(deg) >= 0)
    assert len(idx) == 10


# ---------------------------------------------------------------- properties

@pytest.mark.property
def test_gram_identity():
    x = np.linspace(-14, 14, 1401)
    T = hermite_table(32, x)
    w = np.full(x.size, x[1] - x[0])
    w[[0, -1]] *= 0.5
    G = (T * w) @ T.T
    assert np.max(np.abs(G - np.eye(33))) < 1e-9


@pytest.mark.property
def test_uniform_bound():
    x = np.linspace(0, 40, 8001)
    T = hermite_table(500, x)
    assert np.max(np.abs(T)) <= 1.0


@pytest.mark.property
@given(st.lists(st.tuples(st.integers(0, 40), st.floats(-5, 5), st.floats(-5, 5)),
                min_size=1, max_size=12, unique_by=lambda t: t[0]))
@settings(max_examples=40, deadline=None)
def test_fourier_fourth_power(entries):
    s = HermiteSeries.from_values(1, [e[0] for e in entries],
                                  [complex(e[1], e[2]) for e in entries])
    t = s
    for _ in range(4):
        t = fourier_series(t)
    assert np.array_equal(t.phase, s.phase)
    assert np.array_equal(t.log_mag, s.log_mag)


@pytest.mark.property
@pytest.mark.parametrize("d", [1, 2])
def test_even_function_parity(d):
    N = 12
    f = lambda *xs: np.exp(-0.4 * sum(x * x for x in xs)) * (1 + sum(x**4 for x in xs))
    s = analyze(f, N, dim=d)
    odd = (s.indices % 2).any(axis=1)
    assert np.max(np.abs(s.values()[odd])) < 1e-10


@pytest.mark.property
@given(st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_round_trip_property(seed):
    rng = np.random.default_rng(seed)
    N = 24
    idx = multi_indices(2, N // 2)
    c = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
    s = HermiteSeries.from_values(2, idx, c)
    back = analyze(synthesize(s, Grid.for_order(N // 2, 2)), N // 2).values()
    assert np.max(np.abs(back - c)) / np.max(np.abs(c)) < 1e-8
