"""Weight functions omega and phi(u) = omega(e^u)."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ..config import parse_kv_tokens
from ..errors import InvalidWeight, UsageError

Array = np.ndarray

# phi(u) for u beyond this is evaluated through log_phi only
_EXP_SAFE = 700.0


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """Evaluator for omega with structural flags.

    ``log_phi_fn`` is an optional closed form for log(omega(e^u)) that stays
    finite for huge u; coefficient estimators use it to probe far tails.
    """

    omega_fn: Callable[[Array], Array]
    family: str = "custom"
    a: float | None = None
    claims_concave: bool = False
    claims_convex_phi: bool = True
    log_phi_fn: Callable[[Array], Array] | None = None
    label: str = ""
    table_tmax: float | None = None
    meta: dict = field(default_factory=dict)

    def __call__(self, t) -> Array:
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            return self.omega_fn(t)

    def log_phi(self, u) -> Array:
        u = np.asarray(u, dtype=float)
        if self.log_phi_fn is not None:
            return self.log_phi_fn(u)
        with np.errstate(divide="ignore", over="ignore"):
            val = self.omega_fn(np.exp(np.minimum(u, _EXP_SAFE)))
            out = np.log(val)
        return np.where(u > _EXP_SAFE, np.inf, out)

    def phi(self, u) -> Array:
        u = np.asarray(u, dtype=float)
        if self.log_phi_fn is not None:
            with np.errstate(over="ignore"):
                return np.exp(self.log_phi_fn(u))
        with np.errstate(over="ignore"):
            return np.where(u > _EXP_SAFE, np.inf,
                            self.omega_fn(np.exp(np.minimum(u, _EXP_SAFE))))

    @property
    def has_closed_tail(self) -> bool:
        return self.log_phi_fn is not None

    @property
    def name(self) -> str:
        return self.label or self.family


def power(a: float) -> WeightFunction:
    """omega(t) = t^a."""
    if a <= 0:
        raise InvalidWeight("power weight needs a > 0")
    a = float(a)
    fam = "gaussian_limit" if a == 2.0 else "power"
    return WeightFunction(
        omega_fn=lambda t: t**a,
        family=fam,
        a=a,
        claims_concave=a <= 1,
        claims_convex_phi=True,
        log_phi_fn=lambda u: a * u,
        label=f"power:{a:g}",
    )


def gaussian_limit() -> WeightFunction:
    return power(2.0)


def _log_plus(t: Array) -> Array:
    with np.errstate(divide="ignore"):
        return np.log(np.maximum(t, 1.0))


def logpower(a: float) -> WeightFunction:
    """omega(t) = (log_+ t)^(1+a), a >= 0."""
    if a < 0:
        raise InvalidWeight("logpower weight needs a >= 0")
    a = float(a)
    p = 1.0 + a

    def log_phi(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(u > 0, p * np.log(np.where(u > 0, u, 1.0)), -np.inf)

    return WeightFunction(
        omega_fn=lambda t: _log_plus(t) ** p,
        family="logpower",
        a=a,
        claims_concave=False,
        claims_convex_phi=True,
        log_phi_fn=log_phi,
        label=f"logpower:{a:g}",
    )


def custom(t_table, w_table, label: str = "custom",
           claims_convex_phi: bool = True) -> WeightFunction:
    """Table weight: linear interpolation in t, power-law extrapolation beyond the table."""
    t_table = np.asarray(t_table, float)
    w_table = np.asarray(w_table, float)
    if t_table.ndim != 1 or t_table.shape != w_table.shape or t_table.size < 2:
        raise InvalidWeight("custom table needs two equal-length columns with >= 2 rows")
    if np.any(np.diff(t_table) <= 0):
        raise InvalidWeight("custom table t column must be strictly increasing")
    if np.any(np.diff(w_table) < 0):
        raise InvalidWeight("custom table omega column must be non-decreasing")
    t_last, w_last = t_table[-1], w_table[-1]
    t_prev, w_prev = t_table[-2], w_table[-2]
    if w_prev > 0 and w_last > w_prev:
        p = np.log(w_last / w_prev) / np.log(t_last / t_prev)
    else:
        p = 0.0

    def omega(t):
        t = np.asarray(t, float)
        inside = np.interp(t, t_table, w_table, left=w_table[0])
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            tail = w_last * (np.maximum(t, t_last) / t_last) ** p
        return np.where(t > t_last, tail, inside)

    return WeightFunction(
        omega_fn=omega,
        family="custom",
        claims_convex_phi=claims_convex_phi,
        label=label,
        table_tmax=float(t_last),
    )


def load_table(path: str | Path) -> tuple[Array, Array]:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except (ValueError, IndexError):
            continue  # header row
    if not rows:
        raise InvalidWeight(f"no numeric rows in {path}")
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1]


def from_family(family: str, a: float | None = None, table: str | None = None) -> WeightFunction:
    family = family.strip().lower()
    if family in ("power", "t^a"):
        if a is None:
            raise UsageError("power weight needs a parameter a")
        return power(a)
    if family in ("logpower", "log", "logplus"):
        return logpower(0.0 if a is None else a)
    if family in ("gaussian", "gaussian_limit", "t2"):
        return gaussian_limit()
    if family == "custom":
        if table is None:
            raise UsageError("custom weight needs table=<path>")
        t, w = load_table(table)
        return custom(t, w, label=f"custom:{Path(table).name}")
    raise UsageError(f"unknown weight family {family!r}")


def parse_weight(spec: str) -> WeightFunction:
    """Parse ``power:1.5``, ``logpower:0``, ``gaussian``, ``custom:path``
    or the config form ``family=power a=1.5``."""
    spec = spec.strip()
    if "=" in spec:
        kv = parse_kv_tokens(spec)
        if "family" not in kv:
            raise UsageError("weight config needs family=...")
        a = float(kv["a"]) if "a" in kv else None
        return from_family(kv["family"], a=a, table=kv.get("table"))
    fam, _, param = spec.partition(":")
    if fam.strip().lower() == "custom":
        return from_family("custom", table=param or None)
    try:
        a = float(param) if param else None
    except ValueError as exc:
        raise UsageError(f"bad weight parameter in {spec!r}") from exc
    return from_family(fam, a=a)


def check_weight(w: WeightFunction, t_grid: Array | None = None,
                 n_u: int = 2048, u_max: float = 40.0) -> None:
    """Probe the WeightFunction invariants; raise InvalidWeight on failure."""
    if t_grid is None:
        t_grid = np.concatenate([[0.0], np.logspace(-3, 8, 1101)])
    vals = w(t_grid)
    if np.any(np.isnan(vals)) or np.any(vals < 0):
        raise InvalidWeight(f"{w.name}: omega must be finite and >= 0")
    if np.any(np.diff(vals) < 0):
        raise InvalidWeight(f"{w.name}: omega is not non-decreasing on the probe grid")
    if not float(w(1e8)) > float(w(1.0)) + 1.0:
        raise InvalidWeight(f"{w.name}: omega looks bounded (omega(1e8) <= omega(1) + 1)")
    if w.claims_convex_phi and not phi_is_convex(w, n_u=n_u, u_max=u_max):
        raise InvalidWeight(f"{w.name}: phi(u) = omega(e^u) is not convex")


def phi_is_convex(w: WeightFunction, n_u: int = 2048, u_max: float = 40.0) -> bool:
    u = np.linspace(0.0, u_max, n_u)
    p = w.phi(u)
    p = p[np.isfinite(p)]
    if p.size < 3:
        return True
    d2 = p[2:] - 2 * p[1:-1] + p[:-2]
    scale = max(1.0, float(np.max(np.abs(p))))
    return bool(np.all(d2 >= -1e-9 * scale))
