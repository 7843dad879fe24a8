import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfdecay.bargmann import (EntireSeries, bargmann_from_hermite, bargmann_integral_1d,
                              cauchy_degree_bound, check_bargmann_stft, evaluate,
                              hermite_from_bargmann, kellogg_bound, pl_t2_coefficient,
                              pl_t2_theta_scan, radial_restrict, stft_gaussian)
from tfdecay.constructions import hermite_rate
from tfdecay.errors import ConjugateCutoff
from tfdecay.hermite import Grid, HermiteSeries, SampledFunction, multi_indices, synthesize
from tfdecay.weights import estimate_alpha_plus, logpower, power


def test_definition_examples():
    F = bargmann_from_hermite(HermiteSeries.from_dict(2, {(3, 2): 1.0}))
    assert F.log_abs_of((3, 2)) == pytest.approx(-0.5 * (math.log(6) + math.log(2)), abs=1e-15)
    G = bargmann_from_hermite(HermiteSeries.from_dict(1, {0: 1.0}))
    assert evaluate(G, np.array([[2.0 + 1j]]))[0] == pytest.approx(1.0)


def test_inverse_relation():
    rng = np.random.default_rng(0)
    idx = multi_indices(2, 6)
    c = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
    s = HermiteSeries.from_values(2, idx, c)
    back = hermite_from_bargmann(bargmann_from_hermite(s))
    assert np.allclose(back.values(), c, rtol=1e-14, atol=0)


def test_integral_form_matches_series():
    s = HermiteSeries.from_values(1, np.arange(6), [1.0, 0.5, -0.3, 0.2j, 0.1, -0.05])
    f = synthesize(s, Grid(1, 14.0, 401))
    z = np.array([0.3 + 0.2j, -1.0 + 0.5j])
    assert np.allclose(bargmann_integral_1d(f, z), evaluate(bargmann_from_hermite(s), z[:, None]),
                       rtol=1e-10)


def _window_sample(d=1):
    grid = Grid(d, 12.0, 241)
    return SampledFunction.from_callable(
        lambda *xs: math.pi ** (-d / 4) * np.exp(-0.5 * sum(x * x for x in xs)), grid)


def test_stft_examples():
    f = _window_sample()
    assert stft_gaussian(f, [0.0], [0.0])[0] == pytest.approx((2 * math.pi) ** -0.5, rel=1e-12)
    assert stft_gaussian(f, [2.0], [0.0])[0] == pytest.approx((2 * math.pi) ** -0.5 * math.exp(-1),
                                                              rel=1e-12)


def test_stft_symmetry():
    rng = np.random.default_rng(11)
    s = HermiteSeries.from_values(1, np.arange(8), rng.normal(size=8))
    grid = Grid(1, 14.0, 501)
    f = synthesize(s, grid)
    fhat = synthesize(s.__class__(1, s.indices, s.log_mag,
                                  s.phase * np.array([1, -1j, -1, 1j])[s.degrees % 4]), grid)
    x = rng.uniform(-2, 2, 5)
    xi = rng.uniform(-2, 2, 5)
    lhs = stft_gaussian(f, x, xi)
    rhs = np.exp(-1j * x * xi) * stft_gaussian(fhat, xi, -x)
    assert np.max(np.abs(lhs - rhs)) < 1e-6


def test_bargmann_stft_identity_examples():
    assert check_bargmann_stft(HermiteSeries.from_dict(1, {0: 1.0}), [0.4 - 1.2j, 2.0 + 1j]) < 1e-10
    assert check_bargmann_stft(HermiteSeries.from_dict(1, {1: 1.0}), [1 + 1j]) < 1e-6
    rng = np.random.default_rng(5)
    idx = multi_indices(2, 8)
    s = HermiteSeries.from_values(2, idx, rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx)))
    z = rng.uniform(-1.5, 1.5, (5, 2)) + 1j * rng.uniform(-1.5, 1.5, (5, 2))
    assert check_bargmann_stft(s, z) < 1e-5


def test_radial_restrict_examples():
    F = EntireSeries.from_dict(2, {(2, 0): 3.0, (1, 1): 5.0, (0, 2): 7.0})
    p = radial_restrict(F, [1.0, 0.0])
    assert p.coeffs[2] == pytest.approx(3.0)
    d, n = 2, 3
    D = EntireSeries.from_dict(d, {(n, n): 2.0})
    u = np.full(d, 1 / math.sqrt(d))
    assert radial_restrict(D, u).coeffs[d * n] == pytest.approx(2.0 * d ** (-d * n / 2))
    C = EntireSeries.from_dict(2, {(1, 0): 1.0, (0, 1): -1.0})
    assert radial_restrict(C, [1 / math.sqrt(2), 1 / math.sqrt(2)]).coeffs[1] == 0
    with pytest.raises(ValueError):
        radial_restrict(C, [1.0, 1.0])


def test_cauchy_bound_examples():
    N = 4
    b = cauchy_degree_bound(0.0, np.arange(9), float(N), logpower(0.0))
    assert np.all(np.isfinite(b[: N + 1]))
    assert np.all(np.isneginf(b[N + 1:]))
    with pytest.raises(ConjugateCutoff):
        cauchy_degree_bound(0.0, [N + 1], float(N), logpower(0.0), strict=True)
    assert cauchy_degree_bound(2.0, [10], 1.0, logpower(1.0))[0] == pytest.approx(2.0 - 25.0, rel=1e-6)
    assert cauchy_degree_bound(2.0, [0], 1.0, logpower(1.0))[0] == pytest.approx(2.0, abs=1e-12)


def test_kellogg_factor():
    alpha = np.array([[2, 1]])
    base = cauchy_degree_bound(0.5, [3], 1.0, power(1.0))[0]
    got = kellogg_bound(0.5, alpha, 1.0, power(1.0), 2)[0]
    assert got - base == pytest.approx(math.log(2) + 3 * math.log(2))


def test_pl_constant_theta_scan():
    for eta in (0.05, 0.3, 1.0, 4.0):
        val, theta = pl_t2_theta_scan(eta)
        assert val == pytest.approx(pl_t2_coefficient(eta), abs=1e-10)
        assert theta == pytest.approx(math.asin(1 / (1 + 4 * eta)), abs=1e-5)


# ---------------------------------------------------------------- properties

@pytest.mark.property
@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_isometry_proxy(seed):
    rng = np.random.default_rng(seed)
    idx = multi_indices(3, 5)
    c = rng.normal(size=len(idx)) * np.exp(rng.uniform(-20, 20, len(idx)))
    s = HermiteSeries.from_values(3, idx, c)
    F = bargmann_from_hermite(s)
    lhs = np.log(np.abs(F.values()) ** 2) + np.sum(
        [np.array([math.lgamma(k + 1) for k in col]) for col in idx.T], axis=0)
    assert np.allclose(lhs, 2 * np.log(np.abs(c)), rtol=0, atol=1e-12)


@pytest.mark.property
@pytest.mark.parametrize("w,r", [(power(1.0), 1.0), (logpower(1.0), 1.0)])
def test_degree_bound_consistency(w, r):
    s = hermite_rate(r, 1, 160, w)
    prof = radial_restrict(bargmann_from_hermite(s), [1.0])
    lam = 1.1 * float(estimate_alpha_plus(w)) / r
    t = np.linspace(1.0, 30.0, 59)
    excess = np.array([math.log(prof.circle_sup(x)) for x in t]) - lam * w(t)
    half = t.size // 2
    assert excess[half:].max() <= excess[:half].max() + 1e-9


@pytest.mark.property
@given(st.floats(0.01, 50.0))
@settings(max_examples=25, deadline=None)
def test_pl_constant_property(eta):
    val, _ = pl_t2_theta_scan(eta, n=20001)
    assert val == pytest.approx(pl_t2_coefficient(eta), abs=1e-10)
