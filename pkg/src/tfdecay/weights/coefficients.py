"""Tail-limsup estimators for the weight coefficients.

Every coefficient of the form inf{L : lhs(t) <= L omega(t) + C} is estimated
as the limsup of lhs/omega over the tail of a logarithmic grid, with the
additive constant absorbed by discarding the head of the grid. Ratios are
computed in the log domain.

Grid policy: weights with a closed-form log phi are probed in the variable
u = log t on decades of u (u up to 1e6); other weights use decades of t on
[10, 1e6]. Either way the last decade decides the estimate and its
settledness flag.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ..config import DEFAULT_TOL
from ..errors import (ConstantUnavailable, DivergentRatio, GridBoundaryMinimizer,
                      InfiniteCoefficient, IntegralDiverges, NotAdmissible, NotModerate)
from .conjugate import Conjugate, golden_max, linear_tail_slope
from .functions import WeightFunction

PER_DECADE = 64


@dataclass(frozen=True)
class Estimate:
    """A coefficient estimate; ``diverged`` marks a detected +inf.

    Arithmetic and float() refuse diverged estimates so an infinite
    coefficient never leaks into a bound as a large number.
    """

    value: float
    settled: bool = True
    diverged: bool = False
    variation: float = 0.0
    note: str = ""

    @classmethod
    def infinite(cls, note: str = "") -> "Estimate":
        return cls(math.inf, settled=True, diverged=True, note=note)

    @property
    def finite(self) -> bool:
        return not self.diverged

    def __float__(self) -> float:
        if self.diverged:
            raise InfiniteCoefficient(f"coefficient is +inf ({self.note})")
        return float(self.value)

    def __mul__(self, other):
        return float(self) * float(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return float(self) / float(other)

    def __rtruediv__(self, other):
        return float(other) / float(self)

    def __add__(self, other):
        return float(self) + float(other)

    __radd__ = __add__

    def __repr__(self) -> str:
        if self.diverged:
            return "Estimate(+inf)"
        flag = "" if self.settled else ", unsettled"
        return f"Estimate({self.value:.6g}{flag})"


@dataclass(frozen=True)
class TailGrid:
    """Logarithmic tail grid; ``coord`` holds log10 of u (or of t)."""

    u: np.ndarray
    coord: np.ndarray
    in_u: bool

    @property
    def last_decade(self) -> np.ndarray:
        return self.coord >= self.coord[-1] - 1.0 - 1e-12

    def decade_maxima(self, values: np.ndarray, k: int = 3) -> np.ndarray:
        hi = self.coord[-1]
        out = []
        for j in range(k, 0, -1):
            m = (self.coord >= hi - j - 1e-12) & (self.coord <= hi - j + 1 + 1e-12)
            out.append(np.max(values[m]) if np.any(m) else -np.inf)
        return np.array(out)


def tail_grid(w: WeightFunction, per_decade: int = PER_DECADE,
              extended: bool = True) -> TailGrid:
    if extended and w.has_closed_tail:
        lo, hi = math.log10(math.log(10.0)), 6.0
        c = np.linspace(lo, hi, int(round((hi - lo) * per_decade)) + 1)
        return TailGrid(u=10.0**c, coord=c, in_u=True)
    hi = 6.0
    if w.table_tmax is not None:
        hi = min(hi, math.log10(w.table_tmax))
    lo = 1.0
    if hi - lo < 2.0:
        raise ValueError(f"{w.name}: custom table too short for tail estimation")
    c = np.linspace(lo, hi, int(round((hi - lo) * per_decade)) + 1)
    return TailGrid(u=c * math.log(10.0), coord=c, in_u=False)


def _summarise(grid: TailGrid, log_ratio: np.ndarray, clamp_one: bool = True,
               detect_growth: bool = True, settle: float | None = None,
               note: str = "") -> Estimate:
    settle = DEFAULT_TOL.settle_variation if settle is None else settle
    lr = np.where(np.isnan(log_ratio), -np.inf, log_ratio)
    if detect_growth:
        m = grid.decade_maxima(lr, 3)
        if np.all(np.isfinite(m)) and np.all(np.diff(m) > math.log1p(settle)):
            return Estimate.infinite(note=note or "ratio grows across the last decades")
    tail = lr[grid.last_decade]
    if np.any(np.isposinf(tail)):
        return Estimate.infinite(note=note or "ratio is infinite on the tail")
    top = float(np.max(tail))
    bot = float(np.min(tail))
    value = math.exp(top)
    variation = 1.0 - math.exp(bot - top) if np.isfinite(bot) else 1.0
    if clamp_one:
        value = max(1.0, value)
        if top <= 0.0:
            variation = 0.0
    return Estimate(value, settled=variation <= settle, variation=variation, note=note)


# ---------------------------------------------------------------- alpha family

def estimate_alpha_tau(w: WeightFunction, tau: float, grid: TailGrid | None = None) -> Estimate:
    """alpha_tau(omega): tail limsup of omega(tau t)/omega(t), clamped at 1."""
    if not tau > 1.0:
        raise ValueError("alpha_tau needs tau > 1")
    grid = grid or tail_grid(w)
    with np.errstate(invalid="ignore"):
        lr = w.log_phi(grid.u + math.log(tau)) - w.log_phi(grid.u)
    return _summarise(grid, lr, note=f"alpha_{tau:g}")


def estimate_alpha_tau_strict(w, tau, grid=None) -> Estimate:
    """Like estimate_alpha_tau but raising DivergentRatio on +inf."""
    est = estimate_alpha_tau(w, tau, grid)
    if est.diverged:
        raise DivergentRatio(f"{w.name}: omega(tau t)/omega(t) unbounded for tau={tau:g}")
    return est


def estimate_alpha(w: WeightFunction, grid: TailGrid | None = None) -> Estimate:
    """alpha(omega): limsup of omega(t+s)/(omega(t)+omega(s)) over s <= t."""
    grid = grid or tail_grid(w)
    a2 = estimate_alpha_tau(w, 2.0, grid)
    if a2.diverged:
        raise NotModerate(f"{w.name}: alpha_2 diverges")
    q = np.linspace(0.0, 1.0, 65)
    rho = -np.geomspace(1e-3, 60.0, 64)
    best = np.full(grid.u.shape, -np.inf)
    u = grid.u
    cand = np.concatenate([(-q)[None, :] * u[:, None],
                           np.broadcast_to(rho, (u.size, rho.size))], axis=1)
    cand = np.maximum(cand, -u[:, None])  # s >= 1
    uu = np.broadcast_to(u[:, None], cand.shape)
    with np.errstate(invalid="ignore", divide="ignore"):
        num = w.log_phi(uu + np.log1p(np.exp(cand)))
        den = np.logaddexp(w.log_phi(uu), w.log_phi(uu + cand))
        lr = num - den
    best = np.max(np.where(np.isnan(lr), -np.inf, lr), axis=1)
    return _summarise(grid, best, note="alpha")


ALPHA_PLUS_TAUS = (1.01, 1.05, 1.1, 1.5, 2.0)


def estimate_alpha_plus(w: WeightFunction, grid: TailGrid | None = None,
                        taus=ALPHA_PLUS_TAUS, extrapolate: bool = True) -> Estimate:
    """alpha_+(omega) = inf over tau > 1 of alpha_tau.

    The raw minimum over ``taus`` is biased upward by about tau_min^a for
    power-like weights, so by default log alpha_tau is fitted linearly in
    log tau over the three smallest taus and extrapolated to tau -> 1,
    then clamped to [1, raw minimum].
    """
    grid = grid or tail_grid(w)
    if estimate_alpha_tau(w, 2.0, grid).diverged:
        raise NotModerate(f"{w.name}: alpha_2 diverges")
    taus = tuple(sorted(taus))
    ests = [estimate_alpha_tau(w, t, grid) for t in taus]
    vals = np.array([e.value for e in ests])
    settled = all(e.settled for e in ests)
    raw = float(np.min(vals))
    if not extrapolate:
        return Estimate(raw, settled=settled, note="alpha_plus(raw min)")
    x = np.log(np.array(taus[:3]))
    y = np.log(vals[:3])
    slope, icpt = np.polyfit(x, y, 1)
    value = float(min(raw, max(1.0, math.exp(icpt))))
    return Estimate(value, settled=settled, note="alpha_plus")


# ---------------------------------------------------------------- beta* and PL

def _far_slope(w: WeightFunction, u: float) -> float:
    g = w.log_phi(np.array([u + 200.0, u + 400.0]))
    if not np.all(np.isfinite(g)):
        return math.inf
    return float((g[1] - g[0]) / 200.0)


def _beta_integral(w: WeightFunction, u: float, sigma: float, p_far: float) -> float:
    lp0 = float(w.log_phi(np.array(u)))

    def expo(x):
        return float(w.log_phi(np.array(u + x))) - lp0 - sigma * x

    W = 8.0
    while expo(W) > -40.0 and W < 1e5:
        W *= 2.0
    val, _ = integrate.quad(lambda x: math.exp(expo(x)), 0.0, W, limit=400,
                            epsabs=0.0, epsrel=1e-11)
    tail = math.exp(expo(W)) / max(sigma - p_far, 1e-300)
    return sigma * (val + tail)


def estimate_beta_star(w: WeightFunction, sigma: float, grid: TailGrid | None = None,
                       per_decade: int = 16) -> Estimate:
    """beta*_sigma(omega): tail limsup of sigma int_1^inf omega(ts) s^(-1-sigma) ds / omega(t).

    The integrand is handled in w = log s; the part beyond the truncation
    point is closed with a power-law tail. Raises IntegralDiverges when the
    far log-slope of omega reaches sigma.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    grid = grid or tail_grid(w, per_decade=per_decade)
    p_far = _far_slope(w, float(grid.u[-1]))
    if p_far >= sigma - 1e-9:
        raise IntegralDiverges(
            f"{w.name}: omega(t)/t^sigma does not decay (log-slope {p_far:g} >= {sigma:g})")
    ratios = np.array([_beta_integral(w, float(u), sigma, _far_slope(w, float(u)))
                       for u in grid.u])
    return _summarise(grid, np.log(ratios), note=f"beta*_{sigma:g}")


@dataclass(frozen=True)
class PLSandwich:
    sigma: float
    lower: float
    upper: float
    beta_star: Estimate
    alpha_sqrt2: Estimate

    @property
    def settled(self) -> bool:
        return self.beta_star.settled and self.alpha_sqrt2.settled


def pl_sandwich(w: WeightFunction, sigma: float) -> PLSandwich:
    """beta*/pi <= PL_{pi/sigma} <= (1 + 2 beta*/pi) alpha_sqrt2."""
    try:
        beta = estimate_beta_star(w, sigma)
    except IntegralDiverges as exc:
        raise NotAdmissible(f"{w.name}: beta*_{sigma:g} is infinite, PL is infinite") from exc
    if beta.diverged:
        raise NotAdmissible(f"{w.name}: beta*_{sigma:g} is infinite")
    a = estimate_alpha_tau(w, math.sqrt(2.0))
    b = float(beta)
    return PLSandwich(sigma, b / math.pi, (1.0 + 2.0 * b / math.pi) * float(a), beta, a)


def pl_closed_form(family: str | WeightFunction, theta: float, a: float | None = None) -> float:
    """Exact PL_theta for power and logpower weights."""
    if isinstance(family, WeightFunction):
        a = family.a
        family = family.family
    if family in ("power", "gaussian_limit"):
        if a is None:
            raise ValueError("power family needs a")
        if not 0 < theta < math.pi / a:
            raise NotAdmissible(f"PL_theta(t^{a:g}) is infinite for theta >= pi/a")
        return 1.0 / math.cos(a * theta / 2.0)
    if family == "logpower":
        return 1.0
    raise NotAdmissible(f"no closed form PL for family {family!r}")


# ---------------------------------------------------------------- Gaussian interpolation

def _gi_log_objective(w, d, mu, u):
    c1 = math.log((d - 1) / (2.0 * d))
    c2 = -math.log(mu * d)

    def f(ls):
        with np.errstate(invalid="ignore"):
            return np.logaddexp(c1 + 2.0 * ls / (d - 1), c2 + w.log_phi(d * u - ls))
    return f


def gi_log_ratio(w: WeightFunction, d: int, mu: float, grid: TailGrid,
                 n_inner: int = 2048) -> np.ndarray:
    """log of mu * inf_s[...]/omega(t) along the grid (s in [1, 10 t^(d-1)])."""
    u = grid.u
    ls_max = (d - 1) * u + math.log(10.0)
    frac = np.concatenate([[0.0], np.geomspace(1e-10, 1.0, n_inner - 1)])
    ls = ls_max[:, None] * frac[None, :]
    uu = u[:, None]
    c1 = math.log((d - 1) / (2.0 * d))
    c2 = -math.log(mu * d)
    with np.errstate(invalid="ignore"):
        obj = np.logaddexp(c1 + 2.0 * ls / (d - 1), c2 + w.log_phi(d * uu - ls))
    k = np.argmin(obj, axis=1)
    if np.any(k == n_inner - 1):
        raise GridBoundaryMinimizer(f"{w.name}: GI inner minimiser at the upper s boundary")
    best = obj[np.arange(u.size), k]
    lo = ls[np.arange(u.size), np.maximum(k - 1, 0)]
    hi = ls[np.arange(u.size), k + 1]

    def neg(x):
        with np.errstate(invalid="ignore"):
            return -np.logaddexp(c1 + 2.0 * x / (d - 1), c2 + w.log_phi(d * u - x))

    _, fx = golden_max(neg, lo, hi)
    inner = np.minimum(best, -fx)
    return math.log(mu) + inner - w.log_phi(u)


def gi_coefficient(w: WeightFunction, d: int, mu: float,
                   grid: TailGrid | None = None) -> Estimate:
    """GI_d(omega, mu); Estimate.infinite() when the ratio keeps growing."""
    if d < 2:
        raise ValueError("GI needs d >= 2")
    if mu <= 0:
        raise ValueError("mu must be positive")
    grid = grid or tail_grid(w)
    lr = gi_log_ratio(w, d, mu, grid)
    return _summarise(grid, lr, clamp_one=False, note=f"GI_{d}(mu={mu:g})")


# ---------------------------------------------------------------- theorem constants

@dataclass(frozen=True)
class TheoremConstants:
    h1_d: Estimate
    h2: Estimate
    h1_coord: Estimate
    factors: dict = field(default_factory=dict)

    @property
    def settled(self) -> bool:
        return self.h1_d.settled and self.h2.settled and self.h1_coord.settled


def _alpha_tau_or_one(w, tau, grid):
    if tau <= 1.0:
        return Estimate(1.0)
    return estimate_alpha_tau(w, tau, grid)


def _product(*ests: Estimate) -> Estimate:
    if any(e.diverged for e in ests):
        return Estimate.infinite(note="factor diverges")
    val = 1.0
    for e in ests:
        val *= e.value
    return Estimate(val, settled=all(e.settled for e in ests))


def pl_half_pi(w: WeightFunction) -> Estimate:
    """PL_{pi/2}: closed form when available, sandwich upper bound otherwise."""
    try:
        return Estimate(pl_closed_form(w, math.pi / 2.0))
    except NotAdmissible:
        if w.family in ("power", "gaussian_limit", "logpower"):
            return Estimate.infinite(note="PL_{pi/2} infinite")
    try:
        sw = pl_sandwich(w, 2.0)
    except NotAdmissible:
        return Estimate.infinite(note="PL_{pi/2} infinite")
    return Estimate(sw.upper, settled=sw.settled, note="PL sandwich upper")


def theorem_constants(w: WeightFunction, d: int) -> TheoremConstants:
    """H^1_d, H^2 and H^1 as products of coefficient estimates."""
    grid = tail_grid(w)
    alpha = estimate_alpha(w, grid)
    a_s2 = estimate_alpha_tau(w, math.sqrt(2.0), grid)
    a_d = _alpha_tau_or_one(w, float(d), grid)
    a_2 = estimate_alpha_tau(w, 2.0, grid)
    a_plus = estimate_alpha_plus(w, grid)
    pl = pl_half_pi(w)
    factors = dict(alpha=alpha, alpha_sqrt2=a_s2, alpha_d=a_d, alpha_2=a_2,
                   alpha_plus=a_plus, pl_half_pi=pl)
    return TheoremConstants(
        h1_d=_product(alpha, a_s2, a_d, pl),
        h2=_product(alpha, a_plus, a_2),
        h1_coord=_product(alpha, a_plus, a_s2),
        factors=factors,
    )


def require_settled(est: Estimate, what: str) -> float:
    """Float value of a finite settled estimate, else ConstantUnavailable."""
    if est.diverged:
        raise ConstantUnavailable(f"{what} is infinite")
    if not est.settled:
        raise ConstantUnavailable(f"{what} is not settled (variation {est.variation:.3g})")
    return float(est)


def h1_d_gi(w: WeightFunction, d: int, lam: float) -> Estimate:
    """H^1_d(omega, lambda) = alpha_d H^1 GI_d(omega, (H^1 lambda)^-1)."""
    tc = theorem_constants(w, d)
    if tc.h1_coord.diverged:
        return Estimate.infinite()
    h1 = float(tc.h1_coord)
    gi = gi_coefficient(w, d, 1.0 / (h1 * lam))
    return _product(tc.factors["alpha_d"], tc.h1_coord, gi)


# ---------------------------------------------------------------- aggregate table

@dataclass(frozen=True)
class WeightCoefficients:
    alpha: Estimate
    alpha_tau: dict
    alpha_plus: Estimate
    beta_star: dict
    pl_lower: dict
    pl_upper: dict
    pl_closed: float | None
    gi: dict
    h1_d: Estimate
    h2: Estimate
    h1_coord: Estimate

    def rows(self):
        """(name, value, settled) rows in a fixed order."""
        def row(name, e):
            if isinstance(e, Estimate):
                return (name, math.inf if e.diverged else e.value, e.settled)
            return (name, e, True)
        out = [row("alpha", self.alpha)]
        out += [row(f"alpha_tau[{t:g}]", e) for t, e in sorted(self.alpha_tau.items())]
        out.append(row("alpha_plus", self.alpha_plus))
        out += [row(f"beta_star[{s:g}]", e) for s, e in sorted(self.beta_star.items())]
        out += [(f"pl_lower[{s:g}]", v, True) for s, v in sorted(self.pl_lower.items())]
        out += [(f"pl_upper[{s:g}]", v, True) for s, v in sorted(self.pl_upper.items())]
        if self.pl_closed is not None:
            out.append(("pl_closed[pi/2]", self.pl_closed, True))
        out += [row(f"gi[d={d},mu={m:g}]", e) for (d, m), e in sorted(self.gi.items())]
        out += [row("h1_d", self.h1_d), row("h2", self.h2), row("h1_coord", self.h1_coord)]
        return out


def weight_coefficients(w: WeightFunction, d: int = 2, taus=(1.5, 2.0, 4.0),
                        sigmas=(2.0,), mus=(1.0,)) -> WeightCoefficients:
    grid = tail_grid(w)
    alpha = estimate_alpha(w, grid)
    taus = tuple(sorted(set(taus) | {math.sqrt(2.0)} | ({float(d)} if d > 1 else set())))
    at = {t: estimate_alpha_tau(w, t, grid) for t in taus}
    beta, lower, upper = {}, {}, {}
    for s in sigmas:
        try:
            sw = pl_sandwich(w, s)
            beta[s], lower[s], upper[s] = sw.beta_star, sw.lower, sw.upper
        except NotAdmissible:
            beta[s] = Estimate.infinite(note=f"beta*_{s:g}")
            lower[s], upper[s] = math.inf, math.inf
    try:
        closed = pl_closed_form(w, math.pi / 2.0)
    except NotAdmissible:
        closed = None
    gi = {}
    if d >= 2:
        for m in mus:
            gi[(d, m)] = gi_coefficient(w, d, m, grid)
    tc = theorem_constants(w, d)
    return WeightCoefficients(alpha=alpha, alpha_tau=at,
                              alpha_plus=estimate_alpha_plus(w, grid),
                              beta_star=beta, pl_lower=lower, pl_upper=upper,
                              pl_closed=closed, gi=gi, h1_d=tc.h1_d, h2=tc.h2,
                              h1_coord=tc.h1_coord)


# ---------------------------------------------------------------- psi_mu and M_mu

class _Psi:
    """psi_mu(u) = inf_{v >= 0} [((d-1)/2d) e^(2dv/(d-1)) + phi(d(u-v))/(mu d)]."""

    def __init__(self, w: WeightFunction, mu: float, d: int, n_inner: int = 1024):
        self.w, self.mu, self.d, self.n = w, mu, d, n_inner
        self.c1 = (d - 1) / (2.0 * d)
        self.c2 = 1.0 / (mu * d)

    def _obj(self, u, v):
        with np.errstate(over="ignore", invalid="ignore"):
            return (self.c1 * np.exp(2.0 * self.d * v / (self.d - 1))
                    + self.c2 * self.w.phi(self.d * (u - v)))

    def phi(self, u):
        u = np.atleast_1d(np.asarray(u, float))
        frac = np.linspace(0.0, 1.0, self.n)
        vmax = u + 1.0
        v = vmax[:, None] * frac[None, :]
        obj = self._obj(u[:, None], v)
        k = np.argmin(obj, axis=1)
        best = obj[np.arange(u.size), k]
        lo = v[np.arange(u.size), np.maximum(k - 1, 0)]
        hi = v[np.arange(u.size), np.minimum(k + 1, self.n - 1)]
        _, fx = golden_max(lambda x: -self._obj(u, x), lo, hi, iters=70)
        return np.minimum(best, -fx)


@dataclass(frozen=True)
class GIProfile:
    mu: float
    d: int
    u_grid: np.ndarray
    psi: np.ndarray
    v_grid: np.ndarray
    M: np.ndarray
    explicit: np.ndarray
    cutoff: float | None

    @property
    def discrepancy(self) -> np.ndarray:
        return self.M - self.explicit


def gi_profile_M(w: WeightFunction, mu: float, v_grid, d: int,
                 n_primal: int = 1024) -> GIProfile:
    """psi_mu on a primal grid and its conjugate M_mu on ``v_grid``.

    ``explicit`` holds ((d-1)/2d) v log(v/e) + (1/d)(1/mu) phi*(mu v), the
    closed expression M_mu is compared against.
    """
    if d < 2 or mu <= 0:
        raise ValueError("need d >= 2 and mu > 0")
    v_grid = np.asarray(v_grid, float)
    psi = _Psi(w, mu, d)
    cutoff = linear_tail_slope(psi)
    finite = v_grid <= cutoff * (1 + 1e-12) if cutoff is not None else np.ones(v_grid.shape, bool)
    # psi is convex as an infimal convolution of convex functions
    conj = Conjugate(_PsiShim(psi), n_primal=n_primal, check_convex=False)
    conj.cutoff = cutoff
    M = conj.evaluate(v_grid)
    M = np.where(finite, M, np.inf)
    phis = Conjugate(w).evaluate(mu * v_grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        xlog = np.where(v_grid > 0, v_grid * np.log(np.where(v_grid > 0, v_grid, 1.0) / math.e), 0.0)
    explicit = (d - 1) / (2.0 * d) * xlog + phis / (d * mu)
    return GIProfile(mu=mu, d=d, u_grid=conj.u_grid.copy(), psi=psi.phi(conj.u_grid),
                     v_grid=v_grid, M=M, explicit=explicit, cutoff=cutoff)


class _PsiShim:
    """Duck-typed stand-in exposing phi()/name for the conjugate evaluator."""

    def __init__(self, psi: _Psi):
        self._psi = psi
        self.name = f"psi_mu[{psi.w.name}]"

    def phi(self, u):
        u = np.asarray(u, float)
        shape = u.shape
        return self._psi.phi(u.ravel()).reshape(shape)
