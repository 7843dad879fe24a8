import math

import numpy as np
import pytest

from tfdecay.certify import (certify_hermite, certify_series_tf, hermite_exponential_rate,
                             notgi_log_ratio)
from tfdecay.constructions import (ConstructionSpec, build, counterexample_eta,
                                   diag_counterexample, diag_counterexample_log,
                                   find_gi_gap_sequence, hermite_rate, poly_gaussian,
                                   power_counterexample, power_counterexample_log,
                                   verify_construction)
from tfdecay.errors import ParameterOutOfRange
from tfdecay.hermite import Grid, HermiteSeries, analyze, log_factorial, synthesize
from tfdecay.weights import estimate_alpha, estimate_alpha_tau, logpower, power


def test_diag_counterexample_example():
    s = diag_counterexample(logpower(1.0), 1.0, 2, 20)
    expect = -8 * math.log(2) + 0.5 * math.log(24) - 4
    assert s.log_abs_of((4, 4)) == pytest.approx(expect, abs=1e-9)
    assert s.lookup((4, 3)) == 0


def test_power_counterexample_example():
    s = power_counterexample(1.0, 2, 20)
    assert s.lookup((3, 3)).real == pytest.approx(math.log(3) ** -3 / math.sqrt(6), rel=1e-12)
    # series starts at n = 3
    assert s.lookup((1, 1)) == 0 and s.lookup((2, 2)) == 0


@pytest.mark.parametrize("d", [1, 2, 3])
def test_poly_gaussian_constant(d):
    s = poly_gaussian((((0,) * d, 1.0),), d)
    assert len(s.nonzero()) == 1
    assert s.lookup((0,) * d).real == pytest.approx(math.pi ** (d / 4), rel=1e-13)


def test_eta_rule():
    w = power(1.0)
    eta = counterexample_eta(w, 0.5)
    assert eta == pytest.approx(0.9 * 0.5 / (float(estimate_alpha(w)) *
                                             float(estimate_alpha_tau(w, 2.0))), rel=1e-9)


@pytest.mark.parametrize("kw", [
    dict(family="nope"),
    dict(family="hermite_rate", r=-1.0),
    dict(family="gaussian_width", b=0.5),
    dict(family="gaussian_width", b=0.3, d=2),
    dict(family="diag_counterexample", d=1, weight="power:1", eta=1.0),
    dict(family="diag_counterexample", d=2, weight="power:1"),
    dict(family="power_counterexample", d=2, a=2.5),
    dict(family="poly_gaussian", d=2, poly=(((1,), 1.0),)),
    dict(family="hermite_rate", r=1.0, n_max=5),
])
def test_validation(kw):
    with pytest.raises(ParameterOutOfRange):
        build(ConstructionSpec(**kw))


def test_spec_echo():
    spec = ConstructionSpec("hermite_rate", d=2, r=1.5)
    assert "family=hermite_rate" in spec.echo() and "r=1.5" in spec.echo()
    assert build(spec).meta["spec"] == spec.echo()


def test_gap_sequence_first_index():
    w, d = power(1.0), 2
    seq = find_gi_gap_sequence(w, d, 1)
    n = np.arange(1, 501, dtype=float)
    brute = int(n[np.nonzero(notgi_log_ratio(w, d, 1.0, 1.0, n) >= 0.0)[0][0]])
    assert seq.n_k[0] == brute


def test_gap_sequence_rejects_gi_weight():
    with pytest.raises(ParameterOutOfRange):
        find_gi_gap_sequence(logpower(1.0), 2, 2)


def test_gap_sequence_steps():
    seq = find_gi_gap_sequence(power(1.0), 2, 3)
    assert all(b > a for a, b in zip(seq.n_k, seq.n_k[1:]))
    r = seq.r_of_n(seq.n_k[-1] + 5)
    assert np.all(np.diff(r) >= 0)
    assert r[seq.n_k[1]] == 2 and r[seq.n_k[2]] == 3


def test_power_counterexample_fails_other_powers():
    a = 1.0
    spec = ConstructionSpec("power_counterexample", d=2, a=a, n_max=60)
    rep = verify_construction(build(spec), spec, certify=False)
    row = rep.rows[0]
    assert row.test_id.startswith("fail_other_powers_slope[b=0.35")
    assert row.value > 0


def test_log_squared_control_is_bounded():
    # with GI the sup stays finite for eps below 1/(4 eta)
    w = logpower(1.0)
    spec = ConstructionSpec("diag_counterexample", d=2, weight="logpower:1", eta=0.9, n_max=60)
    rep = verify_construction(build(spec), spec, w, eps_list=(0.05, 0.1), certify=False)
    div = [r for r in rep.rows if r.test_id.startswith("divergence_slope")]
    assert len(div) == 2 and not any(r.passed for r in div)


def test_t_counterexample_diagonal_and_divergence():
    w = power(1.0)
    spec = ConstructionSpec("diag_counterexample", d=2, weight="power:1", lam=1.0, n_max=60)
    rep = verify_construction(build(spec), spec, w, eps_list=(1.0, 2.0, 4.0), certify=False)
    lower = [r for r in rep.rows if r.test_id.startswith("diagonal_lower_bound")]
    assert lower and lower[0].passed


def test_hermite_rate_exponential():
    s = hermite_rate(1.0, 2, 40)
    assert hermite_exponential_rate(s).rate == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------- properties

@pytest.mark.property
def test_diagonal_round_trip():
    d, n_max = 2, 60
    unit = HermiteSeries.from_dict(d, {(n, n): 1.0 for n in range(31)})
    grid = Grid.for_order(n_max, d)
    back = analyze(synthesize(unit, grid), n_max, support=unit.indices).values()
    assert np.max(np.abs(back - 1.0)) < 1e-6
    s = diag_counterexample(power(1.0), 0.45, d, n_max)
    back = analyze(synthesize(s, grid), n_max, support=s.indices).values()
    assert np.max(np.abs(back - s.values())) < 1e-6 * np.max(np.abs(s.values()))


@pytest.mark.property
@pytest.mark.parametrize("w,phi_star", [
    (power(1.0), lambda v: v * np.log(v) - v),
    (logpower(1.0), lambda v: v * v / 4),
])
@pytest.mark.parametrize("eta,d", [(0.45, 2), (1.0, 3)])
def test_diag_closed_form(w, phi_star, eta, d):
    n = np.arange(1, 61, dtype=float)
    expect = -n * d * math.log(2) + 0.5 * log_factorial(n) - eta * phi_star(n / eta)
    got = diag_counterexample_log(w, eta, d, n)
    assert np.allclose(got, expect, rtol=1e-12, atol=1e-12 * np.abs(expect).max())


@pytest.mark.property
def test_power_closed_form():
    n = np.arange(3, 200, dtype=float)
    for a in (0.5, 1.0, 1.5):
        expect = -n * np.log(np.log(n)) + (0.5 - 1 / a) * log_factorial(n)
        assert np.allclose(power_counterexample_log(a, n), expect, rtol=1e-13)


@pytest.mark.property
@pytest.mark.parametrize("deg", [1, 2, 3])
def test_log_case_closure(deg):
    d = 2
    poly = (((deg, 0), 1.0), ((0, deg - 1), -2.0), ((0, 0), 0.5))
    s = poly_gaussian(poly, d)
    cut = certify_hermite(s, logpower(0.0), [1.0]).extra["support_cutoff"]
    assert cut == deg
    rate = certify_series_tf(s, logpower(0.0), Grid.for_order(deg, d, R=10.0)).rate
    assert rate <= deg * 1.05
