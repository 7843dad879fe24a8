"""Generators for the explicit functions: rate-specified series, Gaussian widths,
polynomial times Gaussian, and the diagonal counterexample families."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .certify import (check_gi_sequence_gap, certify_series_tf, notgi_log_ratio,
                      tail_slope)
from .config import DEFAULT_TOL, Tolerances
from .errors import ParameterOutOfRange, SearchExhausted
from .hermite import (Grid, HermiteSeries, SampledFunction, analyze, log_factorial,
                      log_multi_factorial, multi_indices, safe_radius)
from .weights import (Conjugate, WeightFunction, estimate_alpha, estimate_alpha_tau,
                      gi_coefficient, parse_weight)

FAMILIES = ("hermite_rate", "gaussian_width", "poly_gaussian", "diag_counterexample",
            "diag_sequence_counterexample", "power_counterexample")


@dataclass(frozen=True)
class ConstructionSpec:
    """Parameters of one construction; unused fields stay None.

    ``poly`` is a tuple of (exponent tuple, coefficient) pairs. ``weight`` is
    a weight spec string such as ``power:1``.
    """

    family: str
    d: int = 1
    n_max: int = 60
    r: float | None = None
    b: float | None = None
    poly: tuple | None = None
    weight: str | None = None
    eta: float | None = None
    lam: float | None = None
    a: float | None = None
    k_max: int = 3
    n_search: int = 20000

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ParameterOutOfRange(f"unknown family {self.family!r}")
        if self.n_max < 20:
            raise ParameterOutOfRange("n_max must be >= 20")
        if not 1 <= self.d:
            raise ParameterOutOfRange("d must be >= 1")
        f = self.family
        if f == "hermite_rate" and not (self.r is not None and self.r > 0):
            raise ParameterOutOfRange("hermite_rate needs r > 0")
        if f == "gaussian_width":
            if self.d != 1:
                raise ParameterOutOfRange("gaussian_width is one-dimensional")
            if self.b is None or self.b <= 0 or self.b == 0.5:
                raise ParameterOutOfRange("b must lie in (0, 1/2) or (1/2, inf)")
        if f == "poly_gaussian":
            if not self.poly:
                raise ParameterOutOfRange("poly_gaussian needs a nonempty polynomial")
            for exps, _ in self.poly:
                if len(exps) != self.d or min(exps) < 0:
                    raise ParameterOutOfRange("polynomial exponents must match d and be >= 0")
        if f in ("diag_counterexample", "diag_sequence_counterexample", "power_counterexample"):
            if self.d < 2:
                raise ParameterOutOfRange("counterexamples need d >= 2")
        if f in ("diag_counterexample", "diag_sequence_counterexample") and not self.weight:
            raise ParameterOutOfRange(f"{f} needs a weight")
        if f == "diag_counterexample":
            if self.eta is None and self.lam is None:
                raise ParameterOutOfRange("diag_counterexample needs eta or lam")
            if self.eta is not None and self.eta <= 0:
                raise ParameterOutOfRange("eta must be positive")
            if self.lam is not None and self.lam <= 0:
                raise ParameterOutOfRange("lam must be positive")
        if f == "power_counterexample" and not (self.a is not None and 0 < self.a < 2):
            raise ParameterOutOfRange("power_counterexample needs 0 < a < 2")

    def echo(self) -> str:
        return " ".join(f"{k}={v}" for k, v in asdict(self).items() if v is not None)


# ---------------------------------------------------------------- families

def hermite_rate(r: float, d: int, n_max: int, w: WeightFunction | None = None) -> HermiteSeries:
    """|H(f, alpha)| = e^{-r|alpha|}, or the weighted envelope sqrt(alpha!) e^{-phi*(r|alpha|)/r}."""
    idx = multi_indices(d, n_max)
    n = idx.sum(axis=1).astype(float)
    if w is None:
        return HermiteSeries(d, idx, -r * n, np.ones(len(idx)), {"r": r})
    lm = 0.5 * log_multi_factorial(idx) - Conjugate(w).evaluate(r * n) / r
    return HermiteSeries(d, idx, lm, np.ones(len(idx)), {"r": r, "weight": w.name})


def gaussian_width(b: float, n_max: int) -> HermiteSeries:
    """Coefficients of e^{-b x^2} by trapezoid quadrature on a resolving grid."""
    R = max(math.sqrt(38.0 / b), safe_radius(n_max))
    grid = Grid.for_order(n_max, 1, R=R)
    f = SampledFunction.from_callable(lambda x: np.exp(-b * x * x), grid)
    s = analyze(f, n_max)
    return HermiteSeries(1, s.indices, s.log_mag, s.phase, {"source": "analysis"})


def tensor_power(s: HermiteSeries, d: int, n_max: int | None = None) -> HermiteSeries:
    """Coefficients of f(x_1)...f(x_d) from a one-dimensional series, |alpha| <= n_max."""
    if s.dim != 1:
        raise ParameterOutOfRange("tensor_power takes a one-dimensional series")
    n_max = s.max_order if n_max is None else n_max
    lm1 = np.full(n_max + 1, -np.inf)
    ph1 = np.ones(n_max + 1, complex)
    k = s.indices[:, 0]
    keep = k <= n_max
    lm1[k[keep]] = s.log_mag[keep]
    ph1[k[keep]] = s.phase[keep]
    idx = multi_indices(d, n_max)
    return HermiteSeries(d, idx, lm1[idx].sum(axis=1), np.prod(ph1[idx], axis=1),
                         dict(s.meta))


def poly_callable(poly, d: int):
    def P(*x):
        out = np.zeros_like(x[0], dtype=complex)
        for exps, c in poly:
            term = np.full_like(x[0], c, dtype=complex)
            for j, e in enumerate(exps):
                term = term * x[j] ** e
            out = out + term
        return out
    return P


def poly_gaussian(poly, d: int) -> HermiteSeries:
    """P(x) e^{-|x|^2/2}: coefficients up to deg P by (exact) Gauss-Hermite quadrature."""
    deg = max(sum(e) for e, _ in poly)
    P = poly_callable(poly, d)
    s = analyze(lambda *x: P(*x) * np.exp(-0.5 * sum(xi * xi for xi in x)), deg,
                dim=d, nodes=deg + 40)
    return HermiteSeries(d, s.indices, s.log_mag, s.phase, {"source": "analysis"})


def _diag_indices(d: int, n: np.ndarray) -> np.ndarray:
    return np.repeat(n[:, None], d, axis=1)


def counterexample_eta(w: WeightFunction, lam: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """eta = margin * lambda / (alpha alpha_2): strictly inside the admissible range."""
    a = float(estimate_alpha(w))
    a2 = float(estimate_alpha_tau(w, 2.0))
    return tol.counterexample_eta_margin * lam / (a * a2)


def diag_counterexample_log(w: WeightFunction, eta: float, d: int, n: np.ndarray,
                            conj: Conjugate | None = None) -> np.ndarray:
    """log H(f, (n,...,n)) = -n d log 2 + log(n!)/2 - eta phi*(n/eta)."""
    conj = conj or Conjugate(w)
    n = np.asarray(n, float)
    return -n * d * math.log(2.0) + 0.5 * log_factorial(n) - eta * conj.evaluate(n / eta)


def diag_counterexample(w: WeightFunction, eta: float, d: int, n_max: int) -> HermiteSeries:
    n = np.arange(n_max + 1)
    lm = diag_counterexample_log(w, eta, d, n)
    return HermiteSeries(d, _diag_indices(d, n), lm, np.ones(n.size),
                         {"eta": eta, "weight": w.name})


def power_counterexample_log(a: float, n: np.ndarray) -> np.ndarray:
    """log H(f, (n,...,n)) = -n log log n + (1/2 - 1/a) log n!, n >= 3."""
    n = np.asarray(n, float)
    return -n * np.log(np.log(n)) + (0.5 - 1.0 / a) * log_factorial(n)


def power_counterexample(a: float, d: int, n_max: int) -> HermiteSeries:
    n = np.arange(3, n_max + 1)
    return HermiteSeries(d, _diag_indices(d, n), power_counterexample_log(a, n),
                         np.ones(n.size), {"a": a})


@dataclass(frozen=True)
class GapSequence:
    n_k: tuple
    best_log_ratio: tuple

    def r_of_n(self, n_max: int) -> np.ndarray:
        """Step sequence: 1 below n_1, then r_n = k for n_k <= n < n_{k+1}."""
        r = np.ones(n_max + 1)
        for k, nk in enumerate(self.n_k, start=1):
            r[nk:] = k
        return r


def find_gi_gap_sequence(w: WeightFunction, d: int, k_max: int, n_search: int = 20000,
                         check_gi: bool = True) -> GapSequence:
    """First n_k (strictly increasing) with log-ratio (r = k, eps = 1/k) >= log k."""
    if check_gi and gi_coefficient(w, d, 1.0).finite:
        raise ParameterOutOfRange(f"{w.name} satisfies Gaussian interpolation in d={d}")
    conj = Conjugate(w)
    found, best = [], []
    prev = 0
    for k in range(1, k_max + 1):
        n = np.arange(prev + 1, n_search + 1, dtype=float)
        if n.size == 0:
            raise SearchExhausted(f"no room left below n_search={n_search} for k={k}")
        lr = notgi_log_ratio(w, d, float(k), 1.0 / k, n, conj)
        hit = np.nonzero(lr >= math.log(k))[0]
        if hit.size == 0:
            raise SearchExhausted(
                f"k={k}: ratio stays below {k} for n <= {n_search} (best log {lr.max():.4g})",
                float(lr.max()))
        prev = int(n[hit[0]])
        found.append(prev)
        best.append(float(lr[hit[0]]))
    return GapSequence(tuple(found), tuple(best))


def diag_sequence_counterexample(w: WeightFunction, d: int, n_max: int, k_max: int = 3,
                                 n_search: int = 20000,
                                 tol: Tolerances = DEFAULT_TOL) -> HermiteSeries:
    seq = find_gi_gap_sequence(w, d, k_max, n_search)
    L = tol.sequence_L_margin * float(estimate_alpha_tau(w, 2.0 ** d * math.sqrt(d)))
    s_n = seq.r_of_n(n_max) / L
    n = np.arange(n_max + 1, dtype=float)
    conj = Conjugate(w)
    lm = -n * d * math.log(2.0) + 0.5 * log_factorial(n) - conj.evaluate(s_n * n) / s_n
    return HermiteSeries(d, _diag_indices(d, n.astype(int)), lm, np.ones(n.size),
                         {"n_k": seq.n_k, "L": L, "weight": w.name})


def build(spec: ConstructionSpec, tol: Tolerances = DEFAULT_TOL) -> HermiteSeries:
    spec.validate()
    f = spec.family
    if f == "hermite_rate":
        s = hermite_rate(spec.r, spec.d, spec.n_max,
                         parse_weight(spec.weight) if spec.weight else None)
    elif f == "gaussian_width":
        s = gaussian_width(spec.b, spec.n_max)
    elif f == "poly_gaussian":
        s = poly_gaussian(spec.poly, spec.d)
    elif f == "diag_counterexample":
        w = parse_weight(spec.weight)
        eta = spec.eta if spec.eta is not None else counterexample_eta(w, spec.lam, tol)
        s = diag_counterexample(w, eta, spec.d, spec.n_max)
    elif f == "diag_sequence_counterexample":
        s = diag_sequence_counterexample(parse_weight(spec.weight), spec.d, spec.n_max,
                                         spec.k_max, spec.n_search, tol)
    else:
        s = power_counterexample(spec.a, spec.d, spec.n_max)
    meta = dict(s.meta)
    meta["spec"] = spec.echo()
    return HermiteSeries(s.dim, s.indices, s.log_mag, s.phase, meta)


# ---------------------------------------------------------------- checks

def width_ratio_limit(s: HermiteSeries, n_hi: int = 20, n_lo: int = 2, degree: int = 6,
                      eps: float = 1e-16) -> float:
    """Limit of H(f, 2n+2)/H(f, 2n) extrapolated from n_lo <= n <= n_hi.

    Weighted least squares in x = 1/(2n+2), weights from the quadrature
    noise level eps * max|H| relative to each coefficient.
    """
    H = s.values().real
    n = np.arange(n_lo, n_hi + 1)
    top = np.abs(H).max()
    r = H[2 * n + 2] / H[2 * n]
    sig = eps * top * (1 / np.abs(H[2 * n + 2]) + 1 / np.abs(H[2 * n])) * np.abs(r) + 1e-15
    x = 1.0 / (2 * n + 2)
    V = np.vander(x, degree + 1, increasing=True)
    coef = np.linalg.lstsq(V / sig[:, None], r / sig, rcond=None)[0]
    return float(coef[0])


def diagonal_log(s: HermiteSeries) -> tuple[np.ndarray, np.ndarray]:
    """(n, log|H(f,(n,...,n))|) for the diagonal part of s."""
    idx = s.indices
    diag = np.all(idx == idx[:, :1], axis=1)
    return idx[diag, 0].astype(float), s.log_mag[diag]


def fail_other_powers_log_ratio(s: HermiteSeries, b: float, h: float = 1.0):
    """log of |H(f,(n..n))| / (h^{dn} ((n!)^d)^{-b}) along the diagonal."""
    n, lm = diagonal_log(s)
    d = s.dim
    return n, lm - d * n * math.log(h) + b * d * log_factorial(n)


def counterexample_excess_log(s: HermiteSeries, w: WeightFunction, eps: float,
                              conj: Conjugate | None = None):
    """log of |H(f,(n..n))| / (sqrt((dn)!) e^{-phi*(eps d n)/eps}) along the diagonal."""
    conj = conj or Conjugate(w)
    n, lm = diagonal_log(s)
    d = s.dim
    ok = np.isfinite(lm)
    n, lm = n[ok], lm[ok]
    return n, lm - 0.5 * log_factorial(d * n) + conj.evaluate(eps * d * n) / eps


def diagonal_lower_bound_log(s: HermiteSeries, w: WeightFunction, r: float,
                             conj: Conjugate | None = None):
    """log H(f,(n..n)) - (1/d)(log((dn)!)/2 - phi*(r d n)/r); bounded below when the bound holds."""
    conj = conj or Conjugate(w)
    n, lm = diagonal_log(s)
    d = s.dim
    return n, lm - (0.5 * log_factorial(d * n) - conj.evaluate(r * d * n) / r) / d


@dataclass(frozen=True)
class CheckRow:
    test_id: str
    value: float
    passed: bool
    note: str = ""


@dataclass
class ConstructionReport:
    spec: ConstructionSpec
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def coordinate_grid(s: HermiteSeries, R: float = 10.0) -> Grid:
    per_axis = int(s.indices.max()) if len(s) else 0
    return Grid.for_order(per_axis, s.dim, R=R)


def verify_construction(s: HermiteSeries, spec: ConstructionSpec,
                        w: WeightFunction | None = None, *, eps_list=(1.0, 2.0, 4.0),
                        b: float | None = None, h: float = 1.0, R: float = 10.0,
                        certify: bool = True, tol: Tolerances = DEFAULT_TOL) -> ConstructionReport:
    """Coordinate-wise TF certificate at spec.lam, diagonal bounds and divergence slopes."""
    rep = ConstructionReport(spec)
    if w is None and spec.weight:
        w = parse_weight(spec.weight)
    if spec.family == "power_counterexample":
        a = spec.a
        b = b if b is not None else 0.5 * (1.0 / a - 0.5) + 0.1
        n, y = fail_other_powers_log_ratio(s, b, h)
        sl = tail_slope(n, y)
        rep.rows.append(CheckRow(f"fail_other_powers_slope[b={b:g},h={h:g}]", sl, sl > 0))
        if certify and spec.lam is not None:
            wt = w or parse_weight(f"power:{a}")
            certs = certify_series_tf(s, wt, coordinate_grid(s, R), mode="coordinate", tol=tol)
            lam_hat = max(c.rate for c in certs)
            rep.rows.append(CheckRow(f"coordinate_tf[lambda={spec.lam:g}]", lam_hat,
                                     lam_hat <= spec.lam))
        return rep
    if spec.family not in ("diag_counterexample", "diag_sequence_counterexample"):
        raise ParameterOutOfRange("verify_construction handles the counterexample families")
    conj = Conjugate(w)
    if certify and spec.lam is not None:
        certs = certify_series_tf(s, w, coordinate_grid(s, R), mode="coordinate", tol=tol)
        lam_hat = max(c.rate for c in certs)
        rep.rows.append(CheckRow(f"coordinate_tf[lambda={spec.lam:g}]", lam_hat,
                                 lam_hat <= spec.lam))
    if spec.family == "diag_counterexample":
        eta = s.meta.get("eta", spec.eta)
        # the bound needs r large: r > alpha_tau / eta with tau = (2 sqrt d)^d
        tau = (2.0 * math.sqrt(s.dim)) ** s.dim
        r = 1.1 * float(estimate_alpha_tau(w, tau)) / eta
        n, y = diagonal_lower_bound_log(s, w, r, conj)
        half = n.size // 2
        ok = bool(np.min(y[half:]) >= np.min(y[:half]) - 1e-9)
        rep.rows.append(CheckRow(f"diagonal_lower_bound[r={r:.4g}]", float(np.min(y)), ok))
    for eps in eps_list:
        n, y = counterexample_excess_log(s, w, eps, conj)
        sl = tail_slope(n, y)
        # slope of the last quarter minus the quarter before: > 0 means still bending up
        bend = sl - tail_slope(n[: 3 * n.size // 4], y[: 3 * n.size // 4], 1.0 / 3.0)
        rep.rows.append(CheckRow(f"divergence_slope[eps={eps:g}]", sl, sl > 0,
                                 f"bend={bend:.4g}"))
    return rep
