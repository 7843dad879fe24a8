"""Flat key=value configuration: tolerances, weight specs and run configs."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

from .errors import UsageError


def parse_kv_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def parse_kv_tokens(line: str) -> dict[str, str]:
    """Parse a single line of space separated ``key=value`` tokens."""
    out = {}
    for tok in line.split():
        if "=" not in tok:
            raise UsageError(f"expected key=value token, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def _float_list(s: str) -> tuple[float, ...]:
    return tuple(float(p) for p in s.replace(";", ",").split(",") if p.strip())


@dataclass(frozen=True)
class Tolerances:
    tail_lo: float = 2.0
    tail_hi_frac: float = 0.9
    bulk_hi: float = 2.0
    log_floor: float = -600.0
    theorem_slack: float = 0.05
    settle_variation: float = 0.10
    hermite_anchor_order: int = 5
    hermite_min_support: int = 20
    hermite_noise_floor: float = 1e-13
    envelope_tol: float = 1e-9
    lambda_grid: tuple[float, ...] = (1.0, 0.3, 0.1, 0.03)
    counterexample_eta_margin: float = 0.9
    sequence_L_margin: float = 1.1

    def updated(self, overrides: dict[str, str]) -> "Tolerances":
        known = {f.name: f for f in fields(self)}
        kw = {}
        for key, value in overrides.items():
            if key not in known:
                raise UsageError(f"unknown tolerance key {key!r}")
            cur = getattr(self, key)
            if isinstance(cur, tuple):
                kw[key] = _float_list(value)
            elif isinstance(cur, int):
                kw[key] = int(value)
            else:
                kw[key] = float(value)
        return dataclasses.replace(self, **kw)


def load_tolerances(path: str | Path | None = None) -> Tolerances:
    """Packaged defaults, optionally overridden by a key=value file."""
    text = resources.files("tfdecay").joinpath("data/defaults.cfg").read_text()
    tol = Tolerances().updated(parse_kv_text(text))
    if path is not None:
        tol = tol.updated(parse_kv_text(Path(path).read_text()))
    return tol


DEFAULT_TOL = load_tolerances()


@dataclass
class RunConfig:
    command: str
    weight: str | None = None
    d: int = 1
    R: float | None = None
    N: int | None = None
    n_max: int = 60
    lambdas: tuple[float, ...] = ()
    rs: tuple[float, ...] = ()
    eps: tuple[float, ...] = ()
    out: str | None = None
    tol: Tolerances = field(default_factory=lambda: DEFAULT_TOL)
    extra: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        if not 1 <= self.d <= 3:
            raise UsageError("d must be in 1..3")
        if self.R is not None and self.R <= 0:
            raise UsageError("R must be positive")
        if self.N is not None and self.N < 0:
            raise UsageError("N must be nonnegative")
        if self.n_max < 1:
            raise UsageError("nmax must be positive")
        if any(x <= 0 for x in self.lambdas + self.rs + self.eps):
            raise UsageError("lambda, r and eps values must be positive")

    def echo(self) -> str:
        """Deterministic one-line echo written into output headers."""
        parts = [f"command={self.command}"]
        for name in ("weight", "d", "R", "N", "n_max"):
            parts.append(f"{name}={getattr(self, name)}")
        for name in ("lambdas", "rs", "eps"):
            vals = getattr(self, name)
            if vals:
                parts.append(f"{name}=" + ";".join(repr(v) for v in vals))
        for k in sorted(self.extra):
            parts.append(f"{k}={self.extra[k]}")
        return " ".join(parts)
