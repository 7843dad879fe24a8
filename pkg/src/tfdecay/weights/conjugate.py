"""Young conjugate phi*(v) = sup_{u >= 0} [u v - phi(u)] on a refined primal grid."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GridTooSmall, NonConvexPhi
from .functions import WeightFunction, phi_is_convex

_GOLD = (np.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, lo, hi, iters: int = 90):
    """Vectorised golden-section maximisation of unimodal objectives.

    ``f`` maps an array of abscissae (one per problem) to objective values.
    Returns (argmax, max); bracket endpoints are compared at the end.
    """
    lo = np.array(lo, float)
    hi = np.array(hi, float)
    a, b = lo.copy(), hi.copy()
    for _ in range(iters):
        c = b - _GOLD * (b - a)
        d = a + _GOLD * (b - a)
        left = f(c) >= f(d)
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    x = 0.5 * (a + b)
    fx = f(x)
    for end in (lo, hi):
        fe = f(end)
        x = np.where(fe > fx, end, x)
        fx = np.maximum(fx, fe)
    return x, fx


def linear_tail_slope(w: WeightFunction) -> float | None:
    """Limit slope v0 of phi when phi is asymptotically linear (omega ~ c log t).

    Returns None when phi/u is unbounded, i.e. log t = o(omega).
    """
    u = np.array([100.0, 200.0, 400.0])
    with np.errstate(over="ignore", invalid="ignore"):
        p = w.phi(u)
    if not np.all(np.isfinite(p)):
        return None
    s1 = (p[1] - p[0]) / 100.0
    s2 = (p[2] - p[1]) / 200.0
    if s2 <= 0:
        return None
    if abs(s2 - s1) <= 1e-6 * max(1.0, abs(s2)):
        return float(s2)
    return None


@dataclass(frozen=True)
class ConjugateTable:
    v_grid: np.ndarray
    values: np.ndarray
    u_grid: np.ndarray
    maximizers: np.ndarray
    cutoff: float | None
    weight_label: str

    def finite(self) -> np.ndarray:
        return np.isfinite(self.values)


class Conjugate:
    """Reusable phi* evaluator for one weight.

    For each v the primal grid [0, u_max] (``n_primal`` uniform points) is
    scanned, u_max doubling until every finite-valued maximiser is interior,
    and the best cell is refined by golden section.
    """

    def __init__(self, w: WeightFunction, n_primal: int = 2048, u_max0: float = 8.0,
                 max_doublings: int = 40, check_convex: bool = True):
        if check_convex and not phi_is_convex(w):
            raise NonConvexPhi(f"{w.name}: phi(u) = omega(e^u) fails the convexity check")
        self.w = w
        self.n_primal = n_primal
        self.u_max0 = u_max0
        self.max_doublings = max_doublings
        self.cutoff = linear_tail_slope(w)
        self.phi0 = float(w.phi(np.array(0.0)))
        self._last_grid = np.linspace(0.0, u_max0, n_primal)

    def _objective(self, v):
        def f(u):
            with np.errstate(over="ignore", invalid="ignore"):
                val = u * v - self.w.phi(u)
            return np.where(np.isnan(val), -np.inf, val)
        return f

    def evaluate(self, v, return_argmax: bool = False):
        v = np.atleast_1d(np.asarray(v, float))
        if np.any(v < 0) or np.any(np.isnan(v)):
            raise ValueError("phi* is evaluated on v >= 0 only")
        out = np.full(v.shape, np.inf)
        arg = np.full(v.shape, np.inf)
        if self.cutoff is not None:
            finite = v <= self.cutoff * (1 + 1e-12)
            near = v >= self.cutoff * (1 - 1e-6)
        else:
            finite = np.ones(v.shape, bool)
            near = np.zeros(v.shape, bool)
        idx = np.nonzero(finite)[0]
        if idx.size:
            val, am = self._finite_part(v[idx], near[idx])
            out[idx] = val
            arg[idx] = am
        if return_argmax:
            return out, arg
        return out

    def __call__(self, v):
        res = self.evaluate(v)
        return res if np.ndim(v) else float(res[0])

    def _finite_part(self, v, allow_boundary):
        u_max = self.u_max0
        n = self.n_primal
        for _ in range(self.max_doublings + 1):
            u = np.linspace(0.0, u_max, n)
            with np.errstate(over="ignore"):
                ph = self.w.phi(u)
            k = np.empty(v.shape, int)
            best = np.empty(v.shape)
            for s in range(0, v.size, 256):
                blk = v[s:s + 256, None] * u[None, :] - ph[None, :]
                blk = np.where(np.isnan(blk), -np.inf, blk)
                k[s:s + 256] = np.argmax(blk, axis=1)
                best[s:s + 256] = blk[np.arange(blk.shape[0]), k[s:s + 256]]
            bad = (k == n - 1) & ~allow_boundary
            if not np.any(bad):
                break
            u_max *= 2.0
        else:
            raise GridTooSmall(
                f"{self.w.name}: maximiser on the primal boundary at u_max={u_max:g}")
        self._last_grid = u
        lo = u[np.maximum(k - 1, 0)]
        hi = u[np.minimum(k + 1, n - 1)]
        interior = k < n - 1
        xs, fx = golden_max(self._objective(v), lo, hi)
        val = np.where(interior, np.maximum(fx, best), best)
        am = np.where(interior, xs, u[k])
        return val, am

    @property
    def u_grid(self) -> np.ndarray:
        return self._last_grid


def young_conjugate(w: WeightFunction, v_grid, n_primal: int = 2048) -> ConjugateTable:
    """Tabulate phi* on an increasing nonnegative v grid."""
    v_grid = np.asarray(v_grid, float)
    if v_grid.ndim != 1 or np.any(np.diff(v_grid) <= 0) or np.any(v_grid < 0):
        raise ValueError("v_grid must be increasing and nonnegative")
    conj = Conjugate(w, n_primal=n_primal)
    vals, arg = conj.evaluate(v_grid, return_argmax=True)
    return ConjugateTable(v_grid=v_grid, values=vals, u_grid=conj.u_grid.copy(),
                          maximizers=arg, cutoff=conj.cutoff, weight_label=w.name)


def biconjugate(conj: Conjugate, u, v_max: float, n_grid: int = 2048) -> np.ndarray:
    """sup_{0 <= v <= v_max} [u v - phi*(v)] at each u (scan plus golden refinement)."""
    u = np.atleast_1d(np.asarray(u, float))
    if conj.cutoff is not None:
        v_max = min(v_max, conj.cutoff)
    vg = np.linspace(0.0, v_max, n_grid)
    ps = conj.evaluate(vg)
    vals = u[:, None] * vg[None, :] - ps[None, :]
    k = np.argmax(vals, axis=1)
    best = vals[np.arange(u.size), k]
    lo = vg[np.maximum(k - 1, 0)]
    hi = vg[np.minimum(k + 1, n_grid - 1)]

    def f(v):
        return u * v - conj.evaluate(v)

    _, fx = golden_max(f, lo, hi, iters=70)
    return np.maximum(best, fx)
