"""Young conjugate tables with closed-form residuals, written as CSV."""
from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tfdecay import io
from tfdecay.weights import Conjugate, logpower, power


@dataclass(frozen=True)
class Config:
    out: Path = Path("out/conjugates")
    v_max: float = 100.0
    points: int = 401


def closed(family: str, a: float, v: np.ndarray) -> np.ndarray:
    if family == "logpower":
        return a * (1 + a) ** (-(1 + a) / a) * v ** ((1 + a) / a)
    # t^a: the maximiser sits at u = 0 while v/a <= 1
    q = np.maximum(v / a, 1.0)
    return np.where(v / a > 1, q * np.log(q) - q, -1.0)


def main(cfg: Config) -> None:
    v = np.linspace(1.0, cfg.v_max, cfg.points)
    for fam, a, w in [("logpower", 0.5, logpower(0.5)), ("logpower", 1.0, logpower(1.0)),
                      ("logpower", 2.0, logpower(2.0)), ("power", 1.0, power(1.0)),
                      ("power", 1.5, power(1.5))]:
        ps = Conjugate(w).evaluate(v)
        c = closed(fam, a, v)
        rel = np.max(np.abs(ps - c) / np.maximum(1.0, np.abs(c)))
        path = io.write_conjugate(cfg.out / f"{w.name.replace(':', '_')}.csv", v, ps, c,
                                  {"weight": w.name})
        print(f"{w.name:14s} max rel residual {rel:.3g} -> {path}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path, default=Config.out)
    main(Config(out=p.parse_args().out))
