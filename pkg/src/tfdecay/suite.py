"""The ten acceptance criteria as plain functions.

Each returns a :class:`CriterionResult` holding one line per sub-check with the
measured number and the pinned tolerance. The CLI ``suite`` command and the
acceptance test both run these.
"""
from __future__ import annotations

import math
import subprocess
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bargmann import check_bargmann_stft
from .certify import (certify_hermite, certify_series_tf,
                      check_gi_sequence_gap, verify_implication)
from .config import DEFAULT_TOL, Tolerances
from .constructions import (ConstructionSpec, build, coordinate_grid, diagonal_log,
                            fail_other_powers_log_ratio, width_ratio_limit)
from .hermite import (Grid, HermiteSeries, analyze, gauss_hermite_function_rule,
                      hermite_table, multi_indices, synthesize)
from .weights import (Conjugate, biconjugate, estimate_alpha, estimate_alpha_tau,
                      estimate_beta_star, gaussian_limit, gi_coefficient, logpower,
                      pl_sandwich, power)


@dataclass
class Check:
    label: str
    value: float
    target: str
    passed: bool

    def line(self) -> str:
        return f"  [{'ok' if self.passed else 'FAIL'}] {self.label}: {self.value:.6g} ({self.target})"


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, label, value, target, passed) -> None:
        self.checks.append(Check(label, float(value), target, bool(passed)))

    def headline(self) -> str:
        return f"criterion {self.number} {'PASS' if self.passed else 'FAIL'}: {self.title}"

    def report(self) -> str:
        return "\n".join([self.headline()] + [c.line() for c in self.checks]
                         + [f"  note: {n}" for n in self.notes])


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------- 1..3 weights

def criterion_1() -> CriterionResult:
    res = CriterionResult(1, "alpha coefficients of t^a and (log+ t)^(1+a) (2%)")
    for a in (0.5, 1.0, 1.5, 2.0):
        w = power(a)
        for tau in (1.5, 2.0, 4.0):
            est = float(estimate_alpha_tau(w, tau))
            e = _rel(est, tau ** a)
            res.add(f"alpha_{tau:g}(t^{a:g}) / tau^a - 1", e, "<= 0.02", e <= 0.02)
    for a in (0.0, 0.5, 1.0, 2.0):
        est = float(estimate_alpha(logpower(a)))
        e = abs(est - 1.0)
        res.add(f"alpha((log+ t)^{1 + a:g}) - 1", e, "<= 0.02", e <= 0.02)
    return res


def criterion_2() -> CriterionResult:
    res = CriterionResult(2, "PL sandwich for t^a, sigma = 2")
    for a in (0.5, 1.0, 1.5):
        w = power(a)
        sw = pl_sandwich(w, 2.0)
        sec = 1.0 / math.cos(a * math.pi / 4.0)
        res.add(f"a={a:g} lower beta*/pi", sw.lower, f"<= sec = {sec:.6g}", sw.lower <= sec)
        res.add(f"a={a:g} upper (1+2beta*/pi) alpha_sqrt2", sw.upper, f">= sec = {sec:.6g}",
                sec <= sw.upper)
        b = float(estimate_beta_star(w, 2.0))
        e = _rel(b, 2.0 / (2.0 - a))
        res.add(f"a={a:g} beta*_2 vs 2/(2-a)", e, "rel <= 0.02", e <= 0.02)
    return res


def criterion_3() -> CriterionResult:
    res = CriterionResult(3, "Young conjugate of (log+ t)^(1+a)")
    v = np.geomspace(1.0, 100.0, 200)
    for a in (0.5, 1.0, 2.0):
        conj = Conjugate(logpower(a))
        closed = a * (1 + a) ** (-(1 + a) / a) * v ** ((1 + a) / a)
        e = float(np.max(np.abs(conj.evaluate(v) - closed) / closed))
        res.add(f"a={a:g} phi* rel error on [1,100]", e, "<= 0.01", e <= 0.01)
        u = np.linspace(0.5, 3.0, 26)
        back = biconjugate(conj, u, v_max=200.0)
        r = float(np.max(np.abs(back - u ** (1 + a))))
        res.add(f"a={a:g} biconjugation residual", r, "< 1e-6", r < 1e-6)
    return res


# ---------------------------------------------------------------- 4..5 engines

def gram_error(n_max: int = 32) -> float:
    x, wq = gauss_hermite_function_rule(n_max + 40)
    T = hermite_table(n_max, x)
    G = (T * wq) @ T.T
    return float(np.max(np.abs(G - np.eye(n_max + 1))))


def round_trip_error(d: int, N: int, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    idx = multi_indices(d, N)
    vals = rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))
    s = HermiteSeries.from_values(d, idx, vals)
    grid = Grid.for_order(N, d)
    back = analyze(synthesize(s, grid), N)
    return float(np.max(np.abs(back.values() - s.values())) / np.max(np.abs(vals)))


def criterion_4() -> CriterionResult:
    res = CriterionResult(4, "Hermite engine: Gram, round trip, Gaussian widths")
    g = gram_error(32)
    res.add("Gram error n <= 32", g, "< 1e-9", g < 1e-9)
    for d, N in ((1, 64), (2, 16)):
        e = round_trip_error(d, N)
        res.add(f"round trip d={d} N={N}", e, "< 1e-8", e < 1e-8)
    for b in (0.2, 0.3):
        s = build(ConstructionSpec("gaussian_width", b=b, n_max=60))
        lim = width_ratio_limit(s)
        q = (1 - 2 * b) / (1 + 2 * b)
        e = abs(lim - q)
        res.add(f"b={b:g} ratio limit vs (1-2b)/(1+2b)", e, "< 1e-6", e < 1e-6)
    return res


def criterion_5(seed: int = 20240607) -> CriterionResult:
    res = CriterionResult(5, "Bargmann/STFT identity on random series")
    rng = np.random.default_rng(seed)
    for d, N in ((1, 8), (2, 8), (2, 5)):
        idx = multi_indices(d, N)
        vals = rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))
        s = HermiteSeries.from_values(d, idx, vals)
        z = rng.uniform(-2, 2, (5, d)) + 1j * rng.uniform(-2, 2, (5, d))
        e = check_bargmann_stft(s, z)
        res.add(f"d={d} N={N} max rel discrepancy", e, "< 1e-5", e < 1e-5)
    return res


# ---------------------------------------------------------------- 6..9 theorems

def criterion_6(tol: Tolerances = DEFAULT_TOL) -> CriterionResult:
    res = CriterionResult(6, "t^2 chain: Hermite to TF and TF to Hermite, d = 1")
    w = gaussian_limit()
    s = build(ConstructionSpec("hermite_rate", d=1, r=-math.log(0.3), n_max=60))
    # tail region reaches |x| = 8
    grid = Grid.for_order(60, 1, R=8.0 / tol.tail_hi_frac)
    rep = verify_implication("hermite_to_tf", w, 1, s, grid, lam=0.40, tol=tol,
                             test_id="6a")
    res.add("(a) measured lambda for H = 0.3^n", rep.measured, "<= 0.40", rep.passed)
    res.add("(a) 4 d h^2", rep.paper_bound, "< 0.40", rep.paper_bound < 0.40)
    lam = 0.3
    sb = build(ConstructionSpec("gaussian_width", b=0.5 - lam, n_max=60))
    grid = Grid.for_order(60, 1, R=8.0)
    rep = verify_implication("tf_to_hermite", w, 1, sb, grid, tol=tol,
                             allow_hypothesis_violation=True, test_id="6b")
    expect = math.sqrt(lam / (1 - lam))
    res.add("(b) measured Hermite rate h", rep.measured, f"~ {expect:.6g} within 1%",
            _rel(rep.measured, expect) <= 0.01)
    res.add("(b) input lambda", rep.input_rate, f"~ {lam} within 1%", _rel(rep.input_rate, lam) <= 0.01)
    res.add("(b) slack bound / h", rep.slack, "> 2", rep.passed and rep.slack > 2.0)
    return res


def criterion_7() -> CriterionResult:
    res = CriterionResult(7, "GI dichotomy")
    for a in (0.0, 0.5, 1.0):
        for d in (2, 3):
            gi = gi_coefficient(logpower(a), d, 1.0)
            cap = 1.05 * d ** a
            res.add(f"GI_{d}((log+ t)^{1 + a:g})", float(gi) if gi.finite else math.inf,
                    f"<= {cap:.6g}", gi.finite and float(gi) <= cap)
    rep = check_gi_sequence_gap(power(1.0), 2, 1.0, [1.0], n_max=60, n_min=30)
    y = rep.log_ratio[1.0]
    slope = float(np.polyfit(rep.n, y, 1)[0])
    res.add("NotGI log-ratio slope, w = t, d = 2, n in [30, 60]", slope, "> 0", slope > 0)
    return res


def _phi_star_t(v: np.ndarray) -> np.ndarray:
    """Young conjugate of phi(u) = e^u on u >= 0."""
    v = np.asarray(v, float)
    return np.where(v > 1.0, v * np.log(np.maximum(v, 1.0)) - v, -1.0)


def _lgamma1(n: np.ndarray) -> np.ndarray:
    return np.array([math.lgamma(k + 1.0) for k in n])


def fail_other_powers_onset(b: float = 0.35, n_hi: int = 10 ** 7) -> int:
    """First n where the a=1, d=2 ratio starts increasing (closed form)."""
    n = np.arange(3, n_hi, dtype=float)
    y = -n * np.log(np.log(n)) + (0.5 - 1.0 + 2 * b) * np.cumsum(np.log(n))
    up = np.nonzero(np.diff(y) > 0)[0]
    return int(n[up[0]]) if up.size else -1


def criterion_8(tol: Tolerances = DEFAULT_TOL) -> CriterionResult:
    res = CriterionResult(8, "counterexample for t^a, a = 1, d = 2")
    w = power(1.0)
    for lam in (1.0, 0.3, 0.1):
        spec = ConstructionSpec("diag_counterexample", d=2, weight="power:1", lam=lam, n_max=60)
        s = build(spec, tol)
        certs = certify_series_tf(s, w, coordinate_grid(s, 10.0), mode="coordinate", tol=tol)
        lam_hat = max(c.rate for c in certs)
        res.add(f"lambda={lam:g} coordinate rate", lam_hat, f"<= {lam:g}", lam_hat <= lam)
        n, lm = diagonal_log(s)
        eta = s.meta["eta"]
        closed = -2 * n * math.log(2) + 0.5 * _lgamma1(n) - eta * _phi_star_t(n / eta)
        err = float(np.max(np.abs(lm - closed)))
        res.add(f"lambda={lam:g} diagonal closed form", err, "<= 1e-12", err <= 1e-12)
    p = build(ConstructionSpec("power_counterexample", d=2, a=1.0, n_max=60), tol)
    n, lm = diagonal_log(p)
    closed = -n * np.log(np.log(n)) - 0.5 * _lgamma1(n)
    err = float(np.max(np.abs(lm - closed)))
    res.add("power series diagonal closed form", err, "<= 1e-12", err <= 1e-12)
    n, y = fail_other_powers_log_ratio(p, 0.35, 1.0)
    k = max(2, int(math.ceil(0.25 * n.size)))
    slope = float(np.polyfit(n[-k:], y[-k:], 1)[0])
    res.add("b=0.35 h=1 ratio tail slope (n <= 60)", slope, "> 0", slope > 0)
    res.notes.append(f"the b=0.35 ratio first increases at n = {fail_other_powers_onset()}")
    return res


def criterion_9(tol: Tolerances = DEFAULT_TOL) -> CriterionResult:
    res = CriterionResult(9, "polynomial times Gaussian with log+ weight")
    s = build(ConstructionSpec("poly_gaussian", d=1, poly=(((3,), 1.0),)), tol)
    w = logpower(0.0)
    rate = certify_series_tf(s, w, Grid.for_order(3, 1, R=10.0), tol=tol).rate
    res.add("TF rate", rate, "<= 3.2", rate <= 3.2)
    cert = certify_hermite(s, w, [0.25, 1.0 / 3.0, 0.5, 1.0], tol=tol)
    cut = cert.extra["support_cutoff"]
    res.add("Hermite support cutoff", cut, "== 3", cut == 3)
    return res


def criterion_10(tests_dir: str | Path | None = None, budget: float = 600.0) -> CriterionResult:
    """Run the property-marked tests in a subprocess and time them."""
    res = CriterionResult(10, "property suites pass within 10 minutes")
    tests_dir = Path(tests_dir) if tests_dir else Path(__file__).resolve().parents[2] / "tests"
    if not tests_dir.is_dir():
        res.add("tests directory found", 0, str(tests_dir), False)
        return res
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-m", "property",
                           "-p", "no:cacheprovider", str(tests_dir)],
                          capture_output=True, text=True, timeout=budget)
    dt = time.perf_counter() - t0
    res.add("pytest -m property exit code", proc.returncode, "== 0", proc.returncode == 0)
    res.add("runtime seconds", dt, f"< {budget:g}", dt < budget)
    return res


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10}


def run_suite(numbers=None, include_properties: bool = True) -> list[CriterionResult]:
    out = []
    for k in numbers or sorted(CRITERIA):
        if k == 10 and not include_properties:
            continue
        t0 = time.perf_counter()
        r = CRITERIA[k]()
        r.seconds = time.perf_counter() - t0
        out.append(r)
    return out
