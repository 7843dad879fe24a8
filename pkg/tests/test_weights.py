import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfdecay.errors import (GridTooSmall, InfiniteCoefficient, IntegralDiverges, InvalidWeight, UsageError,
                            NonConvexPhi, NotAdmissible)
from tfdecay.hermite import log_factorial
from tfdecay.weights import (Conjugate, Estimate, biconjugate, check_weight, custom,
                             estimate_alpha, estimate_alpha_plus, estimate_alpha_tau,
                             estimate_beta_star, gaussian_limit, gi_coefficient, gi_profile_M,
                             logpower, parse_weight, phi_is_convex, pl_closed_form, pl_sandwich,
                             power, theorem_constants, young_conjugate)


# ---------------------------------------------------------------- weight functions

def test_parse_weight_forms():
    assert parse_weight("power:1.5").a == 1.5
    assert parse_weight("family=logpower a=0").family == "logpower"
    assert parse_weight("gaussian").family == "gaussian_limit"
    assert power(2.0).family == "gaussian_limit"
    with pytest.raises(UsageError):
        parse_weight("spline:3")


def test_custom_table_roundtrip(tmp_path):
    t = np.geomspace(1.0, 1e4, 60)
    p = tmp_path / "w.csv"
    p.write_text("t,w\n" + "\n".join(f"{float(a)!r},{math.sqrt(a)!r}" for a in t))
    w = parse_weight(f"custom:{p}")
    assert w(100.0) == pytest.approx(10.0, rel=1e-3)
    assert w(1e6) == pytest.approx(1e3, rel=1e-2)


def test_check_weight_rejects_decreasing():
    with pytest.raises(InvalidWeight):
        custom([1.0, 2.0, 3.0], [3.0, 2.0, 1.0], label="bad")
    w = custom([0.0, 1.0, 2.0], [0.0, 1.0, 2.0], label="ok")
    w_bad = type(w)(omega_fn=lambda t: 1.0 / (1.0 + t), label="dec")
    with pytest.raises(InvalidWeight):
        check_weight(w_bad)


def test_check_weight_rejects_bounded():
    w = custom([1.0, 10.0, 100.0], [1.0, 1.0, 1.0], label="flat")
    with pytest.raises(InvalidWeight):
        check_weight(w)


@pytest.mark.parametrize("w", [power(0.5), power(1.0), power(2.0), logpower(0.0), logpower(1.0)])
def test_families_have_convex_phi(w):
    check_weight(w)
    assert phi_is_convex(w)


# ---------------------------------------------------------------- Young conjugate

def test_conjugate_log_cutoff():
    c = Conjugate(logpower(0.0))
    assert c.cutoff == pytest.approx(1.0)
    vals = c.evaluate(np.array([0.0, 0.5, 1.0, 1.5]))
    assert np.allclose(vals[:3], 0.0, atol=1e-12)
    assert np.isinf(vals[3])


def test_conjugate_log_squared_at_ten():
    assert Conjugate(logpower(1.0))(10.0) == pytest.approx(25.0, rel=1e-3)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_conjugate_logpower_closed_form(a):
    v = np.linspace(0.5, 50.0, 40)
    closed = a * (1 + a) ** (-(1 + a) / a) * v ** ((1 + a) / a)
    assert np.allclose(Conjugate(logpower(a)).evaluate(v), closed, rtol=1e-9)


def test_conjugate_power_closed_form():
    v = np.linspace(2.0, 80.0, 30)
    q = v / 1.5
    assert np.allclose(Conjugate(power(1.5)).evaluate(v), q * np.log(q) - q, rtol=1e-9)


def test_conjugate_table_fields():
    tab = young_conjugate(logpower(1.0), np.array([0.0, 1.0, 4.0]))
    assert tab.values[2] == pytest.approx(4.0)
    assert tab.cutoff is None
    assert tab.u_grid.size == 2048


def test_nonconvex_phi_rejected():
    t = np.geomspace(1.0, 1e6, 80)
    # phi(u) = u + sqrt(u)/2 is concave near 0
    w = custom(t, np.log(t) + 0.5 * np.sqrt(np.log(t)), label="c")
    with pytest.raises(NonConvexPhi):
        Conjugate(w)


def test_grid_too_small():
    with pytest.raises(GridTooSmall):
        Conjugate(logpower(0.05), max_doublings=0, u_max0=1.0).evaluate(np.array([500.0]))


# ---------------------------------------------------------------- coefficient examples

def test_alpha_tau_examples():
    assert float(estimate_alpha_tau(gaussian_limit(), 2.0)) == pytest.approx(4.0, rel=1e-6)
    assert float(estimate_alpha_tau(logpower(1.0), 10.0)) == pytest.approx(1.0, rel=0.02)
    assert float(estimate_alpha_tau(power(1.0), 3.0)) == pytest.approx(3.0, rel=1e-6)
    with pytest.raises(ValueError):
        estimate_alpha_tau(power(1.0), 1.0)


def test_alpha_and_alpha_plus_examples():
    assert float(estimate_alpha(gaussian_limit())) == pytest.approx(2.0, rel=0.02)
    assert float(estimate_alpha_plus(gaussian_limit())) == pytest.approx(1.0, rel=0.02)
    assert float(estimate_alpha(power(0.5))) == pytest.approx(1.0, rel=0.02)
    assert float(estimate_alpha(logpower(0.0))) == pytest.approx(1.0, rel=0.02)
    assert float(estimate_alpha_plus(logpower(0.0))) == pytest.approx(1.0, rel=0.02)


def test_alpha_tau_diverges_for_exponential_weight():
    t = np.geomspace(1.0, 1e7, 400)
    w = custom(t, np.expm1(np.minimum(t, 600.0) / 50.0) + t, label="exp", claims_convex_phi=False)
    est = estimate_alpha_tau(w, 2.0)
    assert est.diverged


def test_beta_star_examples():
    assert float(estimate_beta_star(power(1.0), 2.0)) == pytest.approx(2.0, rel=0.02)
    assert float(estimate_beta_star(power(1.5), 2.0)) == pytest.approx(4.0, rel=0.02)
    b = estimate_beta_star(logpower(0.0), 2.0)
    assert 1.0 <= float(b) <= 1.1


def test_beta_star_diverges_at_sigma():
    with pytest.raises(IntegralDiverges):
        estimate_beta_star(gaussian_limit(), 2.0)
    with pytest.raises(NotAdmissible):
        pl_sandwich(gaussian_limit(), 2.0)


def test_pl_examples():
    assert pl_closed_form("power", math.pi / 2, 1.0) == pytest.approx(math.sqrt(2))
    assert pl_closed_form(logpower(2.0), 1.0) == 1.0
    sw = pl_sandwich(power(1.0), 2.0)
    assert sw.lower == pytest.approx(2 / math.pi, rel=0.02)
    assert sw.upper == pytest.approx((1 + 4 / math.pi) * math.sqrt(2), rel=0.02)
    assert sw.lower <= math.sqrt(2) <= sw.upper
    with pytest.raises(NotAdmissible):
        pl_closed_form("power", math.pi, 1.0)


def test_gi_examples():
    for a in (0.5, 1.0):
        for d in (2, 3):
            assert float(gi_coefficient(logpower(a), d, 1.0)) <= d ** a * 1.05
    assert gi_coefficient(power(1.0), 2, 1.0).diverged
    assert gi_coefficient(power(0.5), 2, 1.0).diverged
    assert float(gi_coefficient(logpower(0.0), 3, 2.0)) == pytest.approx(1.0, rel=0.02)


def test_theorem_constant_examples():
    tc = theorem_constants(logpower(1.0), 2)
    assert float(tc.h1_d) == pytest.approx(1.0, rel=0.02)
    assert float(tc.h2) == pytest.approx(1.0, rel=0.02)
    a, d = 0.5, 2
    tc = theorem_constants(power(a), d)
    assert float(tc.h1_d) == pytest.approx(2 ** (a / 2) * d ** a / math.cos(a * math.pi / 4), rel=0.02)
    a = 1.5
    assert float(theorem_constants(power(a), 2).h2) == pytest.approx(2 ** (2 * a - 1), rel=0.02)


def test_infinite_estimate_refuses_arithmetic():
    e = Estimate.infinite("test")
    with pytest.raises(InfiniteCoefficient):
        float(e)
    with pytest.raises(InfiniteCoefficient):
        _ = 2.0 * e


def test_gi_profile_log_degenerate():
    # for log+ the conjugate M is +inf beyond v = 1/mu; below it the discrepancy is bounded
    prof = gi_profile_M(logpower(0.0), 1.0, np.linspace(0.0, 0.99, 50), 2)
    assert prof.cutoff == pytest.approx(1.0, rel=1e-6)
    assert np.all(np.isfinite(prof.M))
    assert np.ptp(prof.discrepancy) < 1.0
    assert prof.M[0] <= 1e-12
    beyond = gi_profile_M(logpower(0.0), 1.0, np.array([2.0]), 2)
    assert np.isinf(beyond.M[0])


def test_gi_profile_log_squared_bounded():
    v = np.linspace(10.0, 500.0, 60)
    prof = gi_profile_M(logpower(1.0), 1.0, v, 2)
    assert np.all(np.isfinite(prof.M))
    assert np.ptp(prof.discrepancy) < 5.0


# ---------------------------------------------------------------- invariants

@pytest.mark.property
@given(a=st.floats(0.1, 1.9), t=st.lists(st.floats(0.0, 1e6), min_size=2, max_size=30))
@settings(max_examples=50, deadline=None)
def test_power_monotone(a, t):
    t = np.sort(np.array(t))
    assert np.all(np.diff(power(a)(t)) >= 0)


@pytest.mark.property
@given(a=st.floats(0.0, 3.0))
@settings(max_examples=15, deadline=None)
def test_logpower_unbounded_and_convex(a):
    w = logpower(a)
    assert w(1e8) > w(1.0) + 1
    assert phi_is_convex(w)


@pytest.mark.property
@pytest.mark.parametrize("w", [power(0.5), power(1.5), logpower(0.5), logpower(2.0)])
def test_conjugate_convex_monotone_and_ratio(w):
    v = np.linspace(0.0, 60.0, 301)
    ps = Conjugate(w).evaluate(v)
    scale = max(1.0, np.max(np.abs(ps)))
    assert np.all(np.diff(ps, 2) >= -1e-9 * scale)
    assert np.all(np.diff(ps) >= -1e-9 * scale)
    q = ps[1:] / v[1:]
    assert np.all(np.diff(q) >= -1e-9 * scale)


@pytest.mark.property
@pytest.mark.parametrize("w", [power(1.0), logpower(1.0), logpower(0.5)])
def test_biconjugation(w):
    c = Conjugate(w)
    u = np.linspace(0.2, 4.0, 20)
    back = biconjugate(c, u, v_max=500.0)
    assert np.allclose(back, w.phi(u), rtol=1e-6, atol=1e-9)


@pytest.mark.property
@pytest.mark.parametrize("w", [power(0.5), power(1.0), power(1.5), logpower(1.0)])
def test_alpha_tau_monotone_submultiplicative(w):
    taus = (1.5, 2.0, 3.0, 4.0)
    vals = {t: float(estimate_alpha_tau(w, t)) for t in taus}
    assert all(v >= 1 - 1e-12 for v in vals.values())
    assert all(vals[a] <= vals[b] * (1 + 1e-9) for a, b in zip(taus, taus[1:]))
    assert float(estimate_alpha_tau(w, 2.0 * 2.0)) <= vals[2.0] ** 2 * (1 + 1e-6)
    assert float(estimate_alpha_tau(w, 1.5 * 2.0)) <= vals[1.5] * vals[2.0] * (1 + 1e-6)


@pytest.mark.property
@pytest.mark.parametrize("w", [power(0.5), power(1.0), power(1.5), gaussian_limit(), logpower(1.0)])
def test_alpha_vs_alpha_two(w):
    a = float(estimate_alpha(w))
    a2 = float(estimate_alpha_tau(w, 2.0))
    assert a <= a2 * 1.05
    assert a2 <= 2 * a * 1.05


@pytest.mark.property
@pytest.mark.parametrize("w", [logpower(0.5), logpower(1.0)])
def test_gi_upper_bound_in_mu(w):
    # the bound plus monotonicity in mu forces equality for these weights
    for mu0, mu1 in ((0.5, 1.0), (1.0, 2.0), (2.0, 0.5)):
        g0 = float(gi_coefficient(w, 2, mu0))
        g1 = float(gi_coefficient(w, 2, mu1))
        assert g0 <= max(1.0, mu1 / mu0) * g1 * (1 + 1e-3)


@pytest.mark.property
def test_conjugate_growth_separation():
    c = Conjugate(logpower(1.0))
    v = np.linspace(10.0, 200.0, 50)
    log_ratio = c.evaluate(1.0 * v) / 1.0 - c.evaluate(2.0 * v) / 2.0
    assert log_ratio[-1] - log_ratio[0] < math.log(1e-3)


@pytest.mark.property
@pytest.mark.parametrize("w,tau", [(power(1.0), 2.0), (logpower(1.0), 3.0), (power(0.5), 2.0)])
def test_regularity_absorption(w, tau):
    c = Conjugate(w)
    L = 1.1 * float(estimate_alpha_tau(w, tau))
    n = np.arange(0, 201, dtype=float)
    for r in (0.5, 1.0, 2.0):
        lhs = n * math.log(tau) + (L / r) * c.evaluate(r * n / L)
        rhs = c.evaluate(r * n) / r
        gap = lhs - rhs
        # the constant C_L read off the first half already covers the second half
        assert gap[100:].max() <= gap[:101].max() + 1e-9


@pytest.mark.property
@pytest.mark.parametrize("w", [power(1.0), logpower(1.0)])
def test_summability(w):
    c = Conjugate(w)
    r = 1.0
    s = 0.9 * r / float(estimate_alpha_plus(w))
    n = np.arange(0, 401, dtype=float)
    mult = n + 1  # number of alpha with |alpha| = n in d = 2
    terms = mult * np.exp(-c.evaluate(r * n) / r + c.evaluate(s * n) / s)
    partial = np.cumsum(terms)
    assert partial[-1] - partial[300] < 1e-6 * partial[-1]


@pytest.mark.property
def test_concave_weight_alpha():
    w = power(0.5)
    assert float(estimate_alpha(w)) == pytest.approx(1.0, abs=0.02)
    for tau in (1.5, 2.0, 3.5):
        assert float(estimate_alpha_tau(w, tau)) <= math.ceil(tau)


@pytest.mark.property
@pytest.mark.parametrize("w,d,mu", [(logpower(1.0), 2, 1.0), (logpower(0.5), 3, 1.0)])
def test_gi_sequence_characterisation(w, d, mu):
    G = float(gi_coefficient(w, d, mu))
    r = 0.9 * mu / G
    c = Conjugate(w)
    n = np.arange(0, 201, dtype=float)
    lhs = c.evaluate(r * n) / r
    rhs = (1 - 1 / d) * 0.5 * log_factorial(n) + c.evaluate(mu * n) / (mu * d)
    gap = lhs - rhs
    assert gap[100:].max() <= gap[:101].max() + 1e-6


@pytest.mark.property
@pytest.mark.parametrize("a", [0.0, 0.5, 1.0, 2.0])
def test_sufficient_condition_bound(a):
    for d in (2, 3):
        for mu in (0.5, 1.0, 3.0):
            assert float(gi_coefficient(logpower(a), d, mu)) <= d ** a * 1.02
