"""Two-parameter decay envelopes (rate plus constant) and theorem-level checks.

Time-frequency side: the smallest lambda with
    log|f(x)| + |x|^2/2 <= lambda omega(|x|) + log C
on the tail region, where log C is pinned by the bulk |x| <= bulk_hi.
Hermite side: the largest r on a grid with
    log|H(f, alpha)| - log(alpha!)/2 + phi*(r|alpha|)/r <= log C,
with log C pinned by the low orders |alpha| <= anchor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import ConstantUnavailable, HypothesisViolated, NoDecay, UnderDetermined
from .hermite import (Grid, HermiteSeries, SampledFunction, fourier_series,
                      log_factorial, log_multi_factorial, synthesize)
from .weights import (Conjugate, WeightFunction, gi_coefficient, require_settled,
                      theorem_constants)


@dataclass(frozen=True)
class DecayCertificate:
    kind: str  # tf_uniform | tf_coordinate | hermite | hermite_exponential
    weight: str
    rate: float
    log_constant: float
    residual: float
    settled: bool
    axis: int | None = None
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------- TF side

@dataclass
class _TFProblem:
    g: np.ndarray        # log|f| + r^2/2 on valid samples
    om: np.ndarray       # omega(r)
    bulk: np.ndarray
    tail: np.ndarray
    r: np.ndarray

    def gap(self, lam: float) -> float:
        h = self.g - lam * self.om
        return float(np.max(h[self.tail]) - np.max(h[self.bulk]))

    def log_c(self, lam: float) -> float:
        return float(np.max((self.g - lam * self.om)[self.bulk]))

    def slack(self, lam: float, log_c: float) -> float:
        region = self.bulk | self.tail
        return float(np.min((lam * self.om + log_c - self.g)[region]))


def _tf_problem(r, logf, w, tol: Tolerances, R: float) -> _TFProblem:
    r = np.asarray(r, float).ravel()
    logf = np.asarray(logf, float).ravel()
    ok = logf > tol.log_floor
    hi = tol.tail_hi_frac * R
    bulk = ok & (r <= tol.bulk_hi)
    tail = ok & (r >= tol.tail_lo) & (r <= hi)
    if not np.any(bulk) or not np.any(tail):
        raise NoDecay("no samples above the log floor in the bulk or tail region")
    om = w(r)
    if np.any(om[tail] <= 0):
        raise ValueError("omega must be positive on the tail region")
    return _TFProblem(g=logf + 0.5 * r * r, om=om, bulk=bulk, tail=tail, r=r)


def _min_rate(p: _TFProblem, lam_max: float = 1e8) -> float:
    if p.gap(0.0) <= 1e-12:
        return 0.0
    hi = 1.0
    while p.gap(hi) > 0:
        hi *= 2.0
        if hi > lam_max:
            raise NoDecay("log|f| + |x|^2/2 outgrows every lambda omega on the tail")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if p.gap(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return hi


def _band_slope_test(p: _TFProblem, n_bands: int = 4, min_excess: float = 1.0) -> None:
    """NoDecay when per-band rates keep growing roughly like a power of r.

    Growth that lifts g by less than ``min_excess`` nats over the bulk is
    pre-asymptotic and never flagged.
    """
    if p.g[p.tail].max() - p.g[p.bulk].max() < min_excess:
        return
    rt = p.r[p.tail]
    edges = np.linspace(rt.min(), rt.max(), n_bands + 1)
    lams, mids = [], []
    for k in range(n_bands):
        band = p.tail & (p.r >= edges[k]) & (p.r <= edges[k + 1])
        if not np.any(band):
            return
        sub = _TFProblem(p.g, p.om, p.bulk, band, p.r)
        lams.append(_min_rate(sub))
        mids.append(0.5 * (edges[k] + edges[k + 1]))
    lams = np.array(lams)
    steps = np.diff(lams)
    # a rate saturating like lambda - c/r decelerates; genuine growth does not
    if np.all(lams > 0) and np.all(steps > 0) and steps[-1] >= 0.5 * steps[0]:
        slope = np.polyfit(np.log(mids), np.log(lams), 1)[0]
        if slope > 0.5:
            raise NoDecay(f"band rates grow like r^{slope:.2f}: outside the weighted class")


def _safe_log_abs(v: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(v))


def _combine(problems, kind, w, axis=None) -> DecayCertificate:
    rates = [_min_rate(p) for p in problems]
    lam = max(rates)
    log_c = max(p.log_c(lam) for p in problems)
    resid = min(p.slack(lam, log_c) for p in problems)
    return DecayCertificate(kind=kind, weight=w.name, rate=lam, log_constant=log_c,
                            residual=resid, settled=resid >= -DEFAULT_TOL.envelope_tol,
                            axis=axis, extra={"rates": tuple(rates)})


def certify_tf(f: SampledFunction, fhat: SampledFunction | None, w: WeightFunction,
               mode: str = "uniform", tol: Tolerances = DEFAULT_TOL,
               slope_test: bool = True):
    """Fit the time-frequency envelope for f and f-hat.

    Uniform mode returns one certificate (rate = max over f and f-hat);
    coordinate mode returns one certificate per axis with |x| replaced by |x_j|.
    """
    sides = [f] if fhat is None else [f, fhat]
    R = f.grid.R
    if mode == "uniform":
        probs = [_tf_problem(s.grid.radius(), _safe_log_abs(s.values), w, tol, R) for s in sides]
        if slope_test:
            for p in probs:
                _band_slope_test(p)
        return _combine(probs, "tf_uniform", w)
    if mode == "coordinate":
        certs = []
        for j in range(f.dim):
            probs = [_tf_problem(np.abs(s.grid.mesh()[j]), _safe_log_abs(s.values), w, tol, R)
                     for s in sides]
            if slope_test:
                for p in probs:
                    _band_slope_test(p)
            certs.append(_combine(probs, "tf_coordinate", w, axis=j))
        return certs
    raise ValueError(f"unknown mode {mode!r}")


def series_samples(s: HermiteSeries, grid: Grid) -> tuple[SampledFunction, SampledFunction]:
    """f and f-hat synthesised from a Hermite series on the same grid."""
    return synthesize(s, grid), synthesize(fourier_series(s), grid)


def certify_series_tf(s: HermiteSeries, w: WeightFunction, grid: Grid, mode: str = "uniform",
                      tol: Tolerances = DEFAULT_TOL, slope_test: bool = True):
    f, fh = series_samples(s, grid)
    return certify_tf(f, fh, w, mode=mode, tol=tol, slope_test=slope_test)


# ---------------------------------------------------------------- Hermite side

def _effective_support(s: HermiteSeries, tol: Tolerances, noise_floor: float | None):
    """Indices and log-magnitudes with numerically zero entries removed."""
    lm = s.log_mag
    if noise_floor is None and s.meta.get("source") == "analysis":
        noise_floor = tol.hermite_noise_floor
    keep = np.isfinite(lm)
    if noise_floor is not None and np.any(keep):
        keep &= lm >= np.max(lm[keep]) + math.log(noise_floor)
    return s.indices[keep], lm[keep]


def hermite_envelope_excess(s: HermiteSeries, w: WeightFunction, r: float,
                            exponent: float = 1.0, conj: Conjugate | None = None,
                            tol: Tolerances = DEFAULT_TOL, noise_floor: float | None = None):
    """E_alpha = log|H| - exponent (log(alpha!)/2 - phi*(r|alpha|)/r) per nonzero alpha.

    Returns (degrees, E). Entries beyond a finite conjugate cutoff get +inf.
    """
    conj = conj or Conjugate(w)
    idx, lm = _effective_support(s, tol, noise_floor)
    n = idx.sum(axis=1)
    ps = conj.evaluate(r * n.astype(float)) if n.size else np.zeros(0)
    env = 0.5 * log_multi_factorial(idx) - ps / r
    E = lm - exponent * env
    return n, E


def _envelope_passes(n, E, anchor: int, atol: float) -> tuple[bool, float, float]:
    low = n <= anchor
    log_c = float(np.max(E[low])) if np.any(low) else -math.inf
    high = ~low
    worst = float(np.max(E[high])) if np.any(high) else -math.inf
    if np.isposinf(log_c):
        return False, log_c, worst
    ok = worst <= log_c + atol * max(1.0, abs(log_c)) if np.isfinite(worst) else True
    return bool(ok), log_c, worst


def certify_hermite(s: HermiteSeries, w: WeightFunction, r_grid, exponent: float = 1.0,
                    tol: Tolerances = DEFAULT_TOL, noise_floor: float | None = None,
                    strict: bool = False) -> DecayCertificate:
    """Largest r on ``r_grid`` for which the Hermite envelope holds.

    ``exponent`` = 1/d gives the coordinate-wise envelope form. Support
    below ``hermite_min_support`` sets the ``underdetermined`` flag (or raises
    with ``strict``).
    """
    conj = Conjugate(w)
    idx, _ = _effective_support(s, tol, noise_floor)
    cutoff = int(idx.sum(axis=1).max()) if idx.size else 0
    under = cutoff < tol.hermite_min_support
    if under and strict:
        raise UnderDetermined(f"support reaches only |alpha| = {cutoff}")
    passes = {}
    best = None
    for r in sorted(float(x) for x in r_grid):
        n, E = hermite_envelope_excess(s, w, r, exponent, conj, tol, noise_floor)
        ok, log_c, worst = _envelope_passes(n, E, tol.hermite_anchor_order, tol.envelope_tol)
        passes[r] = ok
        if ok:
            best = (r, log_c, worst)
    extra = {"support_cutoff": cutoff, "underdetermined": under, "passes": passes,
             "exponent": exponent, "conjugate_cutoff": conj.cutoff}
    if best is None:
        return DecayCertificate("hermite", w.name, math.nan, math.nan, math.nan, False, extra=extra)
    r, log_c, worst = best
    resid = log_c - worst if np.isfinite(worst) else math.inf
    return DecayCertificate("hermite", w.name, r, log_c, resid, settled=not under, extra=extra)


def hermite_power_rate(s: HermiteSeries, p: float = 1.0, tol: Tolerances = DEFAULT_TOL,
                       noise_floor: float | None = None,
                       tail_fraction: float = 0.5) -> DecayCertificate:
    """Best r in |H(f, alpha)| <~ e^{-r |alpha|^p} from the tail slope.

    Per-degree maxima of log|H| are regressed on |alpha|^p and log|alpha|
    over the upper ``tail_fraction`` of the nonzero range. The log column
    absorbs polynomial prefactors, which do not change the rate but bias a
    plain line fit at desk orders.
    """
    idx, lm = _effective_support(s, tol, noise_floor)
    if idx.size == 0:
        raise UnderDetermined("empty support")
    n = idx.sum(axis=1)
    degs = np.unique(n)
    env = np.array([lm[n == k].max() for k in degs])
    top = degs.max()
    sel = degs >= (1 - tail_fraction) * top
    if np.count_nonzero(sel) < 2:
        raise UnderDetermined("too few degrees for a slope fit")
    x = degs.astype(float) ** p
    if np.count_nonzero(sel) >= 4 and degs[sel].min() >= 1:
        A = np.column_stack([x[sel], np.log(degs[sel]), np.ones(np.count_nonzero(sel))])
        slope = np.linalg.lstsq(A, env[sel], rcond=None)[0][0]
    else:
        slope = np.polyfit(x[sel], env[sel], 1)[0]
    rate = -float(slope)
    log_c = float(np.max(env + rate * x))
    resid = float(np.min(log_c - rate * x - env))
    return DecayCertificate("hermite_power" if p != 1 else "hermite_exponential",
                            "exp" if p == 1 else f"power:{p:g}", rate, log_c, resid,
                            settled=top >= tol.hermite_min_support,
                            extra={"support_cutoff": int(top), "power": p})


def hermite_exponential_rate(s: HermiteSeries, tol: Tolerances = DEFAULT_TOL,
                             noise_floor: float | None = None,
                             tail_fraction: float = 0.5) -> DecayCertificate:
    """Best exponential rate r in |H(f, alpha)| <~ e^{-r|alpha|}."""
    return hermite_power_rate(s, 1.0, tol, noise_floor, tail_fraction)


# ---------------------------------------------------------------- implications

@dataclass(frozen=True)
class ImplicationReport:
    test_id: str
    input_rate: float
    paper_bound: float
    measured: float
    slack: float
    passed: bool
    hypothesis_ok: bool = True
    note: str = ""

    def row(self) -> tuple:
        return (self.test_id, self.input_rate, self.paper_bound, self.measured,
                self.slack, self.passed)


def t2_hermite_bound(lam: float, d: int) -> float:
    """h threshold for uniform t^2 decay with parameter lambda."""
    return 2.0 * math.sqrt(d) * (4 * lam * lam + 0.5 * lam) ** 0.25


def t2_coordinate_hermite_bound(lam: float, d: int) -> float:
    """h threshold for coordinate-wise t^2 decay."""
    return 2.0 ** (1.0 / d) * (4 * lam * lam + 0.5 * lam) ** (1.0 / (4 * d))


def t2_tf_bound(h: float, d: int) -> float:
    """lambda threshold 4 d h^2 for exponential Hermite decay h^|alpha|."""
    return 4.0 * d * h * h


def _rate_scan(s, w, r_max, exponent, tol, n=41):
    grid = np.unique(np.concatenate([np.geomspace(r_max / 100, 4 * r_max, n),
                                     [(1 - tol.theorem_slack) * r_max]]))
    return certify_hermite(s, w, grid, exponent=exponent, tol=tol)


def verify_implication(direction: str, w: WeightFunction, d: int, series: HermiteSeries,
                       grid: Grid, *, lam: float | None = None,
                       allow_hypothesis_violation: bool = False,
                       tol: Tolerances = DEFAULT_TOL, test_id: str | None = None,
                       r_grid=None) -> ImplicationReport:
    """Measure the input certificate, derive the admissible output region, test it.

    Directions: tf_to_hermite, hermite_to_tf, coordinate_to_hermite,
    coordinate_to_hermite_gi. For t^2 the exponential-rate propositions
    apply; otherwise the weighted ones with constants from the weights module.
    """
    test_id = test_id or f"{direction}:{w.name}:d={d}"
    gaussian = w.family == "gaussian_limit"
    if direction in ("tf_to_hermite", "coordinate_to_hermite", "coordinate_to_hermite_gi"):
        coord = direction != "tf_to_hermite"
        if coord:
            certs = certify_series_tf(series, w, grid, mode="coordinate", tol=tol)
            lam_in = max(c.rate for c in certs)
        else:
            lam_in = certify_series_tf(series, w, grid, tol=tol).rate
        if gaussian:
            hyp = 0 < lam_in < 0.25
            if not hyp and not allow_hypothesis_violation:
                raise HypothesisViolated(f"t^2 bound needs 0 < lambda < 1/4, measured {lam_in:.4g}")
            bound = t2_coordinate_hermite_bound(lam_in, d) if coord else t2_hermite_bound(lam_in, d)
            h = math.exp(-hermite_exponential_rate(series, tol).rate)
            return ImplicationReport(test_id, lam_in, bound, h, bound / h, h < bound, hyp)
        tc = theorem_constants(w, d)
        if direction == "coordinate_to_hermite":
            H = require_settled(tc.h1_coord, "H^1")
            exponent = 1.0 / d
        elif direction == "coordinate_to_hermite_gi":
            h1 = require_settled(tc.h1_coord, "H^1")
            gi = gi_coefficient(w, d, 1.0 / (h1 * lam_in)) if lam_in > 0 else gi_coefficient(w, d, 1e6)
            H = require_settled(tc.factors["alpha_d"], "alpha_d") * h1 * require_settled(gi, "GI")
            exponent = 1.0
        else:
            H = require_settled(tc.h1_d, "H^1_d")
            exponent = 1.0
        if lam_in <= 0:
            r_max = 1e3
        else:
            r_max = 1.0 / (H * lam_in)
        r_test = (1 - tol.theorem_slack) * r_max
        cert = _rate_scan(series, w, r_max, exponent, tol) if r_grid is None else \
            certify_hermite(series, w, list(r_grid) + [r_test], exponent=exponent, tol=tol)
        ok = bool(cert.extra["passes"].get(r_test, False)) or (
            np.isfinite(cert.rate) and cert.rate >= r_test)
        meas = cert.rate if np.isfinite(cert.rate) else 0.0
        return ImplicationReport(test_id, lam_in, r_max, meas,
                                 meas / r_test if r_test > 0 else math.inf, ok,
                                 note=f"exponent={exponent:g}")
    if direction == "hermite_to_tf":
        if gaussian:
            h = math.exp(-hermite_exponential_rate(series, tol).rate)
            bound = t2_tf_bound(h, d)
            lam_check = lam if lam is not None else bound * (1 + tol.theorem_slack)
            hyp = h < 1.0 / math.sqrt(4 * d)
            if lam_check <= bound:
                raise HypothesisViolated(f"check lambda {lam_check:g} <= 4 d h^2 = {bound:g}")
            if not hyp and not allow_hypothesis_violation:
                raise HypothesisViolated(f"needs h < 1/sqrt(4d), measured {h:.4g}")
            meas = certify_series_tf(series, w, grid, tol=tol).rate
            slack = lam_check / meas if meas > 0 else math.inf
            return ImplicationReport(test_id, h, bound, meas, slack, meas <= lam_check, hyp,
                                     note=f"checked at lambda={lam_check:g}")
        rg = r_grid if r_grid is not None else np.round(np.arange(0.05, 4.0001, 0.05), 10)
        r_in = certify_hermite(series, w, rg, tol=tol).rate
        if not np.isfinite(r_in):
            raise ConstantUnavailable("no r on the grid certifies the Hermite envelope")
        tc = theorem_constants(w, d)
        bound = require_settled(tc.h2, "H^2") / r_in
        allowed = bound * (1 + tol.theorem_slack)
        meas = certify_series_tf(series, w, grid, tol=tol).rate
        return ImplicationReport(test_id, r_in, bound, meas,
                                 allowed / meas if meas > 0 else math.inf, meas <= allowed)
    raise ValueError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------- NotGI sequences

def notgi_log_ratio(w: WeightFunction, d: int, r: float, eps: float, n,
                    conj: Conjugate | None = None) -> np.ndarray:
    """log of (sqrt((dn)!) e^{-phi*(r d n)/r})^{1/d} / (sqrt((dn)!) e^{-phi*(eps d n)/eps})."""
    conj = conj or Conjugate(w)
    n = np.asarray(n, float)
    lf = 0.5 * log_factorial(d * n)
    num = (lf - conj.evaluate(r * d * n) / r) / d
    den = lf - conj.evaluate(eps * d * n) / eps
    return num - den


@dataclass(frozen=True)
class GapReport:
    r: float
    d: int
    n: np.ndarray
    log_ratio: dict       # eps -> array
    slope: dict           # eps -> last-quarter slope
    diverging: dict       # eps -> bool


def tail_slope(n: np.ndarray, y: np.ndarray, fraction: float = 0.25) -> float:
    k = max(2, int(math.ceil(fraction * n.size)))
    return float(np.polyfit(n[-k:], y[-k:], 1)[0])


def check_gi_sequence_gap(w: WeightFunction, d: int, r: float, eps_list, n_max: int = 60,
                          n_min: int = 1) -> GapReport:
    """Log-ratio sequences for each eps with last-quarter slopes."""
    conj = Conjugate(w)
    n = np.arange(n_min, n_max + 1, dtype=float)
    lr, sl, dv = {}, {}, {}
    for eps in eps_list:
        y = notgi_log_ratio(w, d, r, eps, n, conj)
        lr[eps] = y
        sl[eps] = tail_slope(n, y)
        dv[eps] = sl[eps] > 0
    return GapReport(r, d, n, lr, sl, dv)
