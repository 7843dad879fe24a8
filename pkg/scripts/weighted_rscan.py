"""TF rate of the (log+ t)^2 envelope series as the grid radius grows."""
from __future__ import annotations

import argparse
from dataclasses import dataclass

from tfdecay.certify import certify_series_tf
from tfdecay.constructions import hermite_rate
from tfdecay.hermite import Grid
from tfdecay.weights import logpower, theorem_constants


@dataclass(frozen=True)
class Config:
    d: int = 1
    a: float = 1.0
    r: float = 1.0
    n_max: int = 60
    radii: tuple[float, ...] = (6.0, 8.0, 10.0, 12.0, 14.0)


def main(cfg: Config) -> None:
    w = logpower(cfg.a)
    s = hermite_rate(cfg.r, cfg.d, cfg.n_max, w)
    bound = float(theorem_constants(w, cfg.d).h2) / cfg.r
    print(f"{w.name} d={cfg.d} r={cfg.r:g}: H^2/r = {bound:.4f}")
    for R in cfg.radii:
        lam = certify_series_tf(s, w, Grid.for_order(cfg.n_max, cfg.d, R=R)).rate
        print(f"R={R:5.1f}  lambda_hat={lam:.4f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--d", type=int, default=Config.d)
    p.add_argument("--nmax", type=int, default=Config.n_max)
    ns = p.parse_args()
    main(Config(d=ns.d, n_max=ns.nmax))
