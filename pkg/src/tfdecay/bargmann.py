"""Bargmann transform as a Taylor series, Gaussian-window STFT and their link.

With z = x + i xi the two transforms satisfy
    V f(x, xi) = (2 pi)^(-d/2) e^(-|z|^2/4) e^(-i<x, xi>/2) B f(conj(z)/sqrt 2),
where B h_alpha(z) = z^alpha / sqrt(alpha!).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConjugateCutoff
from .hermite import (CoefficientMap, Grid, HermiteSeries, SampledFunction,
                      _trapezoid_weights, log_factorial, log_multi_factorial, synthesize)
from .weights import Conjugate, WeightFunction


class EntireSeries(CoefficientMap):
    """Taylor coefficients c_alpha of an entire function F(z) = sum c_alpha z^alpha."""

    taylor = True


def bargmann_from_hermite(s: HermiteSeries) -> EntireSeries:
    """c_alpha = H(f, alpha) / sqrt(alpha!)."""
    lm = s.log_mag - 0.5 * log_multi_factorial(s.indices)
    return EntireSeries(s.dim, s.indices, lm, s.phase, dict(s.meta))


def hermite_from_bargmann(F: EntireSeries) -> HermiteSeries:
    """H(f, alpha) = c_alpha sqrt(alpha!) (derivative at 0 over sqrt(alpha!))."""
    lm = F.log_mag + 0.5 * log_multi_factorial(F.indices)
    return HermiteSeries(F.dim, F.indices, lm, F.phase, dict(F.meta))


def _log_terms(F: EntireSeries, z: np.ndarray):
    """log|c_alpha z^alpha| and the unit phase of each term, shape (m, K)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        logz = np.log(np.abs(z))  # (m, d)
        argz = np.where(np.abs(z) > 0, z / np.where(np.abs(z) > 0, np.abs(z), 1.0), 1.0)
        idx = F.indices.astype(float)  # (K, d)
        # 0 * log 0 := 0 for alpha_j = 0
        lz = np.where(idx[None, :, :] == 0, 0.0, logz[:, None, :] * idx[None, :, :])
    lmag = F.log_mag[None, :] + lz.sum(axis=2)
    ph = F.phase[None, :] * np.prod(argz[:, None, :] ** F.indices[None, :, :], axis=2)
    return lmag, ph


def evaluate_log(F: EntireSeries, z) -> tuple[np.ndarray, np.ndarray]:
    """(log|F(z)|, phase) at points z of shape (m, d), summed with max-scaling."""
    z = np.asarray(z, complex).reshape(-1, F.dim)
    lmag, ph = _log_terms(F, z)
    top = np.max(lmag, axis=1)
    top = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(under="ignore"):
        s = np.sum(np.exp(lmag - top[:, None]) * ph, axis=1)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(s)) + top, np.where(s != 0, s / np.where(s != 0, np.abs(s), 1), 1)


def evaluate(F: EntireSeries, z) -> np.ndarray:
    lm, ph = evaluate_log(F, z)
    with np.errstate(over="ignore", under="ignore"):
        return np.exp(lm) * ph


def tail_bound(F: EntireSeries, radius: float) -> float:
    """Estimate of sum_{n > N} (sum_{|alpha|=n} |c_alpha|) radius^n by ratio extrapolation."""
    N = F.max_order
    if N < 1:
        return 0.0
    deg = F.degrees
    a = np.array([np.sum(np.exp(F.log_mag[deg == n])) for n in (N - 1, N)]) * radius ** np.array([N - 1, N])
    if a[0] <= 0:
        return 0.0 if a[1] == 0 else math.inf
    rho = a[1] / a[0]
    return float(a[1] * rho / (1 - rho)) if rho < 1 else math.inf


# ---------------------------------------------------------------- STFT

def gaussian_window(x: np.ndarray, d: int) -> np.ndarray:
    return math.pi ** (-d / 4) * np.exp(-0.5 * x * x)


def stft_gaussian(f: SampledFunction, x, xi, check: bool = True) -> np.ndarray:
    """(2 pi)^(-d/2) int f(t) phi(t - x) e^{-i<t, xi>} dt at points x, xi of shape (m, d)."""
    d = f.dim
    x = np.asarray(x, float).reshape(-1, d)
    xi = np.asarray(xi, float).reshape(-1, d)
    if check:
        f.check_truncation()
    t = f.grid.axis
    w = _trapezoid_weights(f.grid)
    out = np.empty(x.shape[0], complex)
    for k in range(x.shape[0]):
        F = f.values
        # contract one axis at a time; window and phase factorise across axes
        for ax in range(d):
            kern = np.exp(-0.5 * (t - x[k, ax]) ** 2 - 1j * t * xi[k, ax]) * w
            F = np.tensordot(kern, F, axes=([0], [0]))
        out[k] = complex(F) * (2 * math.pi) ** (-d / 2) * math.pi ** (-d / 4)
    return out


def stft_from_bargmann(F: EntireSeries, x, xi) -> np.ndarray:
    """Right-hand side of the Bargmann/STFT identity."""
    d = F.dim
    x = np.asarray(x, float).reshape(-1, d)
    xi = np.asarray(xi, float).reshape(-1, d)
    z = x + 1j * xi
    lm, ph = evaluate_log(F, np.conj(z) / math.sqrt(2.0))
    z2 = np.sum(np.abs(z) ** 2, axis=1)
    pref = -0.5 * d * math.log(2 * math.pi) - z2 / 4.0
    with np.errstate(over="ignore", under="ignore"):
        return np.exp(lm + pref) * ph * np.exp(-0.5j * np.sum(x * xi, axis=1))


def stft_grid(N: int, d: int, max_freq: float) -> Grid:
    """Grid fine enough for order-N content times the window, modulated up to ``max_freq``.

    The windowed integrand has a Gaussian spectral tail e^{-k^2/4} beyond
    sqrt(2N+1) + |xi|; a margin of 13 puts the aliased mass below 1e-16.
    """
    R = Grid.for_order(N, d).R
    delta = 2.0 * math.pi / (math.sqrt(2 * N + 1) + max_freq + 13.0)
    pts = int(math.ceil(2 * R / delta)) + 1
    return Grid(d, R, pts + (pts % 2 == 0))


def check_bargmann_stft(s: HermiteSeries, z_samples) -> float:
    """Max relative discrepancy between quadrature STFT and the Bargmann side."""
    z = np.asarray(z_samples, complex).reshape(-1, s.dim)
    x, xi = z.real, z.imag
    grid = stft_grid(s.max_order, s.dim, float(np.abs(xi).max()))
    f = synthesize(s, grid)
    lhs = stft_gaussian(f, x, xi)
    rhs = stft_from_bargmann(bargmann_from_hermite(s), x, xi)
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))


def bargmann_integral_1d(f: SampledFunction, z) -> np.ndarray:
    """B f(z) = pi^(-1/4) int f(t) exp(-(z^2 + t^2)/2 + sqrt2 z t) dt (d = 1 cross-check)."""
    if f.dim != 1:
        raise ValueError("integral form is implemented for d = 1 only")
    z = np.atleast_1d(np.asarray(z, complex))
    t = f.grid.axis
    w = _trapezoid_weights(f.grid)
    K = np.exp(-0.5 * (z[:, None] ** 2 + t[None, :] ** 2) + math.sqrt(2) * z[:, None] * t[None, :])
    return math.pi ** -0.25 * (K * w[None, :]) @ f.values


# ---------------------------------------------------------------- radial restriction

@dataclass(frozen=True)
class RadialProfile:
    """F_u(z) = F(u z) = sum_n coeff_n z^n for a unit direction u."""

    direction: np.ndarray
    log_abs: np.ndarray
    phase: np.ndarray
    log_abs_sum: np.ndarray  # log of sum_{|alpha|=n} |c_alpha|

    @property
    def coeffs(self) -> np.ndarray:
        with np.errstate(under="ignore", over="ignore"):
            return np.exp(self.log_abs) * self.phase

    def evaluate(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, complex))
        n = np.arange(self.log_abs.size)
        with np.errstate(divide="ignore"):
            lt = self.log_abs[None, :] + n[None, :] * np.log(np.abs(z))[:, None]
        lt = np.where(n[None, :] == 0, self.log_abs[None, :], lt)
        ph = self.phase[None, :] * np.exp(1j * n[None, :] * np.angle(z)[:, None])
        top = np.max(lt, axis=1)
        top = np.where(np.isfinite(top), top, 0.0)
        with np.errstate(under="ignore", over="ignore"):
            return np.exp(top) * np.sum(np.exp(lt - top[:, None]) * ph, axis=1)

    def circle_sup(self, t: float, n_angles: int = 256) -> float:
        ang = 2 * math.pi * np.arange(n_angles) / n_angles
        return float(np.max(np.abs(self.evaluate(t * np.exp(1j * ang)))))


def radial_restrict(F: EntireSeries, u) -> RadialProfile:
    """Per-degree contraction sum_{|alpha|=n} c_alpha u^alpha (fsum in linear scale)."""
    u = np.asarray(u, float).reshape(-1)
    if u.size != F.dim or abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ValueError("u must be a unit vector of the series dimension")
    N = F.max_order
    deg = F.degrees
    log_abs = np.full(N + 1, -math.inf)
    phase = np.ones(N + 1, complex)
    log_sum = np.full(N + 1, -math.inf)
    with np.errstate(divide="ignore"):
        logu = np.log(np.abs(u))
    sgn = np.sign(u)
    for n in range(N + 1):
        sel = deg == n
        if not np.any(sel):
            continue
        idx = F.indices[sel]
        lm = F.log_mag[sel]
        with np.errstate(invalid="ignore"):
            lu = np.where(idx == 0, 0.0, idx * logu[None, :]).sum(axis=1)
        su = np.prod(np.where(idx == 0, 1.0, sgn[None, :] ** idx), axis=1)
        lt = lm + lu
        fin = np.isfinite(lm)
        if np.any(fin):
            top_all = float(np.max(lm[fin]))
            log_sum[n] = top_all + math.log(math.fsum(np.exp(lm[fin] - top_all)))
        fin_t = np.isfinite(lt)
        if not np.any(fin_t):
            continue
        top = float(np.max(lt[fin_t]))
        terms = np.exp(lt[fin_t] - top) * su[fin_t] * F.phase[sel][fin_t]
        s = complex(math.fsum(terms.real), math.fsum(terms.imag))
        if s != 0:
            log_abs[n] = top + math.log(abs(s))
            phase[n] = s / abs(s)
    return RadialProfile(u, log_abs, phase, log_sum)


# ---------------------------------------------------------------- Cauchy bounds

def cauchy_degree_bound(log_CF: float, n, lam: float, w: WeightFunction,
                        conj: Conjugate | None = None, strict: bool = False) -> np.ndarray:
    """log C_F - lam phi*(n / lam) for an envelope |F_u(z)| <= C_F e^{lam omega(|z|)}.

    Where phi*(n/lam) is +inf the bound is -inf (coefficient forced to 0);
    with ``strict`` a ConjugateCutoff is raised instead.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    conj = conj or Conjugate(w)
    n = np.atleast_1d(np.asarray(n, float))
    ps = conj.evaluate(n / lam)
    if strict and np.any(np.isinf(ps)):
        raise ConjugateCutoff(f"n/lambda beyond the finite domain of phi* (cutoff {conj.cutoff})")
    out = log_CF - lam * ps
    return out


def kellogg_bound(log_CF: float, alpha, lam: float, w: WeightFunction, d: int,
                  conj: Conjugate | None = None) -> np.ndarray:
    """log of C_F alpha! d^n e^{-lam phi*(n/lam)} bounding |F^(alpha)(0)|, n = |alpha|."""
    idx = np.asarray(alpha, dtype=np.int64).reshape(-1, d)
    n = idx.sum(axis=1)
    base = cauchy_degree_bound(log_CF, n, lam, w, conj)
    return base + log_multi_factorial(idx) + n * math.log(d)


def empirical_degree_bound(profile: RadialProfile, n: int, t_grid, n_angles: int = 256) -> float:
    """log inf_t sup_{|z|=t} |F_u(z)| / t^n measured on the circle."""
    best = math.inf
    for t in np.asarray(t_grid, float):
        best = min(best, math.log(profile.circle_sup(t, n_angles)) - n * math.log(t))
    return best


# ---------------------------------------------------------------- PL constant for t^2

def pl_t2_coefficient(eta: float) -> float:
    """sqrt(eta^2 + eta/2), the Gaussian exponent after the sector argument."""
    return math.sqrt(eta * eta + 0.5 * eta)


def pl_t2_theta_scan(eta: float, n: int = 200001) -> tuple[float, float]:
    """min over theta in (0, pi/2) of (eta + 1/4) sec(theta) - tan(theta)/4 by dense scan.

    Returns (minimum, argmin); the scan is refined by golden section.
    """
    from .weights import golden_max

    th = np.linspace(1e-9, math.pi / 2 - 1e-9, n)
    val = (eta + 0.25) / np.cos(th) - 0.25 * np.tan(th)
    k = int(np.argmin(val))
    lo, hi = th[max(k - 1, 0)], th[min(k + 1, n - 1)]
    x, fx = golden_max(lambda t: -((eta + 0.25) / np.cos(t) - 0.25 * np.tan(t)),
                       np.array([lo]), np.array([hi]))
    return float(min(val[k], -fx[0])), float(x[0])


def homogeneous_log_lambda(log_CF: float, n: int, lam: float, w: WeightFunction) -> float:
    """Scalar convenience wrapper around cauchy_degree_bound."""
    return float(cauchy_degree_bound(log_CF, np.array([n]), lam, w)[0])


__all__ = [n for n in dir() if not n.startswith("_")] + ["log_factorial"]
