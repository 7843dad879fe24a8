"""Hermite functions, Hermite series in d <= 3 dimensions, analysis and synthesis.

Coefficients are kept as (log|H|, phase) pairs so that envelopes such as
sqrt(alpha!) exp(-phi*(r|alpha|)/r) can be compared without overflow.
Multi-indices are enumerated by degree, ties broken lexicographically.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy.special import gammaln, roots_hermite

from .errors import AliasError, TruncationError

PI_M14 = math.pi ** -0.25
_RESCALE = 1e100
MAX_DENSE_DIM = 3


# ---------------------------------------------------------------- Hermite functions

def _recurrence(N: int, x: np.ndarray, keep: bool):
    """Scaled three-term recurrence; yields mantissa rows and a shared log scale."""
    m_prev = np.zeros_like(x)
    m = np.full_like(x, PI_M14)
    E = -0.5 * x * x
    rows = [(m.copy(), E.copy())] if keep else None
    for n in range(N):
        m_next = math.sqrt(2.0 / (n + 1)) * x * m - math.sqrt(n / (n + 1)) * m_prev
        m_prev, m = m, m_next
        big = np.abs(m) > _RESCALE
        if np.any(big):
            f = np.where(big, np.abs(m), 1.0)
            m = m / f
            m_prev = m_prev / f
            E = E + np.log(f)
        if keep:
            rows.append((m.copy(), E.copy()))
    return rows, m, E


def hermite_table(N: int, x) -> np.ndarray:
    """Array of shape (N+1, len(x)) with h_0..h_N evaluated at x."""
    x = np.atleast_1d(np.asarray(x, float))
    rows, _, _ = _recurrence(N, x, keep=True)
    out = np.empty((N + 1, x.size))
    with np.errstate(under="ignore"):
        for n, (m, E) in enumerate(rows):
            out[n] = m * np.exp(E)
    return out


def hermite_eval(n: int, x):
    """h_n(x), the L2-normalised Hermite function."""
    if n < 0:
        raise ValueError("n must be >= 0")
    xa = np.atleast_1d(np.asarray(x, float))
    _, m, E = _recurrence(n, xa, keep=False)
    with np.errstate(under="ignore"):
        val = m * np.exp(E)
    return val if np.ndim(x) else float(val[0])


def hermite_log_abs(n: int, x):
    """log|h_n(x)| computed without leaving the scaled representation."""
    xa = np.atleast_1d(np.asarray(x, float))
    _, m, E = _recurrence(n, xa, keep=False)
    with np.errstate(divide="ignore"):
        val = np.log(np.abs(m)) + E
    return val if np.ndim(x) else float(val[0])


# ---------------------------------------------------------------- multi-indices

@lru_cache(maxsize=64)
def _indices_cached(d: int, N: int) -> np.ndarray:
    rows = []
    for n in range(N + 1):
        rows.extend(a for a in itertools.product(range(n + 1), repeat=d) if sum(a) == n)
    return np.array(rows, dtype=np.int64).reshape(-1, d)


def multi_indices(d: int, N: int) -> np.ndarray:
    """All alpha in N^d with |alpha| <= N, by degree then lexicographically."""
    return _indices_cached(d, N).copy()


def order_key(alpha: Iterable[int]):
    a = tuple(int(v) for v in alpha)
    return (sum(a), a)


def log_factorial(n) -> np.ndarray:
    return gammaln(np.asarray(n, float) + 1.0)


def log_multi_factorial(idx: np.ndarray) -> np.ndarray:
    """log(alpha!) = sum_j log(alpha_j!) for each row."""
    return np.sum(gammaln(np.asarray(idx, float) + 1.0), axis=-1)


# ---------------------------------------------------------------- series types

@dataclass(frozen=True, eq=False)
class CoefficientMap:
    """Sparse alpha -> (log magnitude, unit phase) map, sorted by order_key."""

    dim: int
    indices: np.ndarray
    log_mag: np.ndarray
    phase: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1, self.dim)
        lm = np.asarray(self.log_mag, float).reshape(-1)
        ph = np.asarray(self.phase, complex).reshape(-1)
        if not (idx.shape[0] == lm.size == ph.size):
            raise ValueError("indices, log_mag and phase lengths differ")
        if np.any(idx < 0):
            raise ValueError("multi-indices must be nonnegative")
        if np.any(np.isnan(lm)) or np.any(np.isposinf(lm)):
            raise ValueError("log magnitudes must be finite or -inf")
        order = sorted(range(idx.shape[0]), key=lambda i: order_key(idx[i]))
        idx, lm, ph = idx[order], lm[order], ph[order]
        if idx.shape[0] > 1:
            keys = [tuple(r) for r in idx]
            if len(set(keys)) != len(keys):
                raise ValueError("duplicate multi-index")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "log_mag", lm)
        object.__setattr__(self, "phase", ph)

    # construction -------------------------------------------------------
    @classmethod
    def from_values(cls, dim: int, indices, values, **meta):
        v = np.asarray(values, complex).reshape(-1)
        mag = np.abs(v)
        with np.errstate(divide="ignore"):
            lm = np.log(mag)
        # rescale subnormals so v / |v| stays finite
        with np.errstate(over="ignore", invalid="ignore"):
            vs = np.where((mag > 0) & (mag < 1e-290), v * 2.0**600, v)
            ph = np.where(mag > 0, vs / np.where(mag > 0, np.abs(vs), 1.0), 1.0 + 0j)
        return cls(dim, np.asarray(indices).reshape(-1, dim), lm, ph, dict(meta))

    @classmethod
    def from_dict(cls, dim: int, mapping: Mapping, **meta):
        keys = [tuple(k) if np.ndim(k) else (int(k),) for k in mapping]
        return cls.from_values(dim, np.array(keys, dtype=np.int64).reshape(-1, dim),
                               list(mapping.values()), **meta)

    # access ---------------------------------------------------------------
    @property
    def degrees(self) -> np.ndarray:
        return self.indices.sum(axis=1)

    @property
    def max_order(self) -> int:
        return int(self.degrees.max()) if self.indices.size else 0

    def __len__(self) -> int:
        return self.indices.shape[0]

    def values(self) -> np.ndarray:
        with np.errstate(under="ignore"):
            return np.exp(self.log_mag) * self.phase

    def as_dict(self) -> dict:
        return {tuple(int(v) for v in a): c for a, c in zip(self.indices, self.values())}

    def lookup(self, alpha) -> complex:
        a = np.asarray(alpha).reshape(1, self.dim)
        hit = np.nonzero(np.all(self.indices == a, axis=1))[0]
        return complex(self.values()[hit[0]]) if hit.size else 0.0 + 0j

    def log_abs_of(self, alpha) -> float:
        a = np.asarray(alpha).reshape(1, self.dim)
        hit = np.nonzero(np.all(self.indices == a, axis=1))[0]
        return float(self.log_mag[hit[0]]) if hit.size else -math.inf

    def nonzero(self) -> "CoefficientMap":
        keep = np.isfinite(self.log_mag)
        return type(self)(self.dim, self.indices[keep], self.log_mag[keep],
                          self.phase[keep], dict(self.meta))

    def truncated(self, N: int) -> "CoefficientMap":
        keep = self.degrees <= N
        return type(self)(self.dim, self.indices[keep], self.log_mag[keep],
                          self.phase[keep], dict(self.meta))

    def scaled(self, log_c: float) -> "CoefficientMap":
        return type(self)(self.dim, self.indices, self.log_mag + log_c, self.phase,
                          dict(self.meta))

    def dense(self, N: int | None = None) -> np.ndarray:
        """Coefficients in a dense (N+1)^d complex array."""
        N = self.max_order if N is None else N
        out = np.zeros((N + 1,) * self.dim, complex)
        vals = self.values()
        for a, v in zip(self.indices, vals):
            if a.max() <= N:
                out[tuple(a)] = v
        return out


class HermiteSeries(CoefficientMap):
    """Hermite coefficients H(f, alpha) of f = sum H(f, alpha) h_alpha."""

    taylor = False


def fourier_series(s: HermiteSeries) -> HermiteSeries:
    """Coefficients of the Fourier transform: phase times (-i)^|alpha|."""
    k = s.degrees % 4
    units = np.array([1.0 + 0j, -1j, -1.0 + 0j, 1j])
    ph = s.phase * units[k]
    return HermiteSeries(s.dim, s.indices, s.log_mag, ph, dict(s.meta))


# ---------------------------------------------------------------- sampled functions

@dataclass(frozen=True)
class Grid:
    """Tensor grid with ``points`` uniform nodes on [-R, R] per axis."""

    dim: int
    R: float
    points: int

    def __post_init__(self):
        if self.points < 2 or self.R <= 0 or self.dim < 1:
            raise ValueError("grid needs dim >= 1, R > 0, points >= 2")

    @property
    def delta(self) -> float:
        return 2.0 * self.R / (self.points - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.R, self.R, self.points)

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.axis] * self.dim), indexing="ij")

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(m * m for m in self.mesh()))

    @classmethod
    def for_order(cls, N: int, dim: int = 1, R: float | None = None,
                  alias_margin: float = 0.9, tol: float = 1e-17) -> "Grid":
        """Grid that resolves order-N content: R beyond where h_N < tol, odd point count."""
        if R is None:
            R = safe_radius(N, tol)
        dmax = alias_margin * alias_limit(N)
        pts = int(math.ceil(2 * R / dmax)) + 1
        if pts % 2 == 0:
            pts += 1
        return cls(dim, float(R), pts)


def alias_limit(N: int) -> float:
    """Largest admissible spacing for order-N Hermite content."""
    return math.pi / (2.0 * math.sqrt(2 * N + 1))


def safe_radius(N: int, tol: float = 1e-17) -> float:
    """Smallest half-integer R with |h_n(x)| < tol for all x >= R and n <= N."""
    x = np.arange(0.0, math.sqrt(2 * N + 1) + 40.0, 0.05)
    tab = np.abs(hermite_table(N, x)).max(axis=0)
    above = np.nonzero(tab >= tol)[0]
    R = x[above[-1]] + 0.05 if above.size else 1.0
    return math.ceil(2 * R) / 2.0


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, complex)
        if v.shape != (self.grid.points,) * self.grid.dim:
            raise ValueError(f"values shape {v.shape} does not match grid")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.grid.dim

    @classmethod
    def from_callable(cls, f: Callable, grid: Grid) -> "SampledFunction":
        return cls(grid, np.asarray(f(*grid.mesh()), complex))

    def boundary_max(self) -> float:
        v = np.abs(self.values)
        m = 0.0
        for ax in range(self.dim):
            m = max(m, float(np.take(v, 0, axis=ax).max()), float(np.take(v, -1, axis=ax).max()))
        return m

    def check_truncation(self, rel: float = 1e-14) -> None:
        peak = float(np.abs(self.values).max())
        if peak > 0 and self.boundary_max() > rel * peak:
            raise TruncationError(
                f"boundary magnitude {self.boundary_max():.3g} exceeds {rel:g} x max {peak:.3g}")

    def scaled(self, c: complex) -> "SampledFunction":
        return SampledFunction(self.grid, self.values * c)


# ---------------------------------------------------------------- analysis / synthesis

def _trapezoid_weights(grid: Grid) -> np.ndarray:
    w = np.full(grid.points, grid.delta)
    w[0] = w[-1] = 0.5 * grid.delta
    return w


def gauss_hermite_function_rule(M: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for int g(x) dx with g decaying like a Gaussian.

    weight_i = w_i e^{x_i^2} = 1/(M h_{M-1}(x_i)^2), computed without overflow.
    """
    x, _ = roots_hermite(M)
    h = hermite_table(M - 1, x)[M - 1]
    return x, 1.0 / (M * h * h)


def _contract_dense(T: list[np.ndarray], F: np.ndarray) -> np.ndarray:
    d = F.ndim
    if d == 1:
        return T[0] @ F
    if d == 2:
        return T[0] @ F @ T[1].T
    if d == 3:
        return np.einsum("ai,bj,ck,ijk->abc", T[0], T[1], T[2], F, optimize=True)
    raise ValueError("dense analysis supports d <= 3")


def _contract_one(T: list[np.ndarray], F: np.ndarray, alpha) -> complex:
    res = F
    for j, a in enumerate(alpha):
        res = np.tensordot(T[j][a], res, axes=([0], [0]))
    return complex(res)


def analyze(f, N: int, support=None, *, dim: int | None = None, nodes: int | None = None,
            check: bool = True) -> HermiteSeries:
    """Hermite coefficients H(f, alpha) = (f, h_alpha) for |alpha| <= N.

    ``f`` is a SampledFunction (trapezoid rule on its grid) or a callable
    taking d coordinate arrays (tensor Gauss-Hermite rule with ``nodes``
    points per axis, ``dim`` required). ``support`` restricts the output to
    the given multi-indices and lifts the d <= 3 cap.
    """
    if isinstance(f, SampledFunction):
        d = f.dim
        if check:
            if f.grid.delta > alias_limit(N):
                raise AliasError(
                    f"spacing {f.grid.delta:.4g} exceeds pi/(2 sqrt(2N+1)) = {alias_limit(N):.4g}")
            f.check_truncation()
        x = f.grid.axis
        w = _trapezoid_weights(f.grid)
        F = f.values
    else:
        if dim is None:
            raise ValueError("callable input needs dim")
        d = dim
        M = nodes or max(N + 40, 64)
        x, w = gauss_hermite_function_rule(M)
        mesh = np.meshgrid(*([x] * d), indexing="ij")
        F = np.asarray(f(*mesh), complex)
    for ax in range(d):
        shape = [1] * d
        shape[ax] = w.size
        F = F * w.reshape(shape)
    if support is not None:
        idx = np.asarray(support, dtype=np.int64).reshape(-1, d)
        top = int(idx.max()) if idx.size else 0
        T = [hermite_table(top, x)] * d
        vals = [_contract_one(T, F, a) for a in idx]
        return HermiteSeries.from_values(d, idx, vals, source="analysis")
    if d > MAX_DENSE_DIM:
        raise ValueError("dense analysis is capped at d <= 3; pass support= for sparse input")
    T = [hermite_table(N, x)] * d
    C = _contract_dense(T, F)
    idx = multi_indices(d, N)
    vals = C[tuple(idx.T)]
    return HermiteSeries.from_values(d, idx, vals, source="analysis")


def synthesize(s: HermiteSeries, grid: Grid) -> SampledFunction:
    """Evaluate sum H(f, alpha) h_alpha on a tensor grid."""
    if s.dim != grid.dim:
        raise ValueError("series and grid dimensions differ")
    N = s.max_order
    T = hermite_table(N, grid.axis)
    if s.dim <= MAX_DENSE_DIM:
        C = s.dense(N)
        if s.dim == 1:
            vals = C @ T
        elif s.dim == 2:
            vals = T.T @ C @ T
        else:
            vals = np.einsum("abc,ai,bj,ck->ijk", C, T, T, T, optimize=True)
        return SampledFunction(grid, vals)
    vals = np.zeros((grid.points,) * s.dim, complex)
    for a, c in zip(s.indices, s.values()):
        term = c
        for j, aj in enumerate(a):
            shape = [1] * s.dim
            shape[j] = grid.points
            term = term * T[aj].reshape(shape)
        vals = vals + term
    return SampledFunction(grid, vals)


def synthesize_at(s: HermiteSeries, points) -> np.ndarray:
    """Evaluate the series at scattered points of shape (m, d)."""
    pts = np.asarray(points, float).reshape(-1, s.dim)
    N = s.max_order
    tabs = [hermite_table(N, pts[:, j]) for j in range(s.dim)]
    out = np.zeros(pts.shape[0], complex)
    for a, c in zip(s.indices, s.values()):
        term = np.full(pts.shape[0], c, complex)
        for j, aj in enumerate(a):
            term = term * tabs[j][aj]
        out += term
    return out


def fourier_samples(f: SampledFunction, grid: Grid | None = None) -> SampledFunction:
    """Direct quadrature of (2 pi)^(-d/2) int f(x) e^{-i<x, xi>} dx on a xi grid."""
    grid = grid or f.grid
    x = f.grid.axis
    w = _trapezoid_weights(f.grid)
    K = np.exp(-1j * np.outer(grid.axis, x)) * w[None, :]
    F = f.values
    for ax in range(f.dim):
        F = np.moveaxis(np.tensordot(K, F, axes=([1], [ax])), 0, ax)
    return SampledFunction(grid, F * (2 * math.pi) ** (-f.dim / 2))
