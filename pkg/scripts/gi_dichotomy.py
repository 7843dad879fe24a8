"""GI coefficients of log weights next to NotGI slopes of power weights."""
from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from tfdecay.certify import check_gi_sequence_gap
from tfdecay.weights import gi_coefficient, logpower, power


@dataclass(frozen=True)
class Config:
    dims: tuple[int, ...] = (2, 3)
    log_a: tuple[float, ...] = (0.0, 0.5, 1.0, 2.0)
    power_a: tuple[float, ...] = (0.5, 1.0, 1.5)
    n_max: int = 60


def main(cfg: Config) -> None:
    print("weight          d   GI_d(w, 1)   d^a")
    for a in cfg.log_a:
        for d in cfg.dims:
            g = gi_coefficient(logpower(a), d, 1.0)
            print(f"logpower:{a:<5g}  {d}   {float(g):10.5f}   {d ** a:8.4f}")
    print("\nweight          d   NotGI tail slope (r = eps = 1)")
    for a in cfg.power_a:
        for d in cfg.dims:
            rep = check_gi_sequence_gap(power(a), d, 1.0, [1.0], n_max=cfg.n_max, n_min=30)
            y = rep.log_ratio[1.0]
            print(f"power:{a:<8g}  {d}   {np.polyfit(rep.n, y, 1)[0]:10.5f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--nmax", type=int, default=Config.n_max)
    main(Config(n_max=p.parse_args().nmax))
