"""Slope of the fail-other-powers ratio against the truncation, and where it turns up."""
from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from tfdecay.certify import tail_slope
from tfdecay.constructions import power_counterexample_log
from tfdecay.suite import fail_other_powers_onset, _lgamma1


@dataclass(frozen=True)
class Config:
    a: float = 1.0
    d: int = 2
    b: float = 0.35
    h: float = 1.0
    n_max_list: tuple[int, ...] = (60, 200, 1000, 10 ** 4, 10 ** 5, 10 ** 6, 2 * 10 ** 6)


def log_ratio(cfg: Config, n: np.ndarray) -> np.ndarray:
    """log of H(f,(n,..,n)) / (h^{dn} (alpha!)^{-b}), alpha = (n,..,n), for the power construction."""
    return (power_counterexample_log(cfg.a, n) - cfg.d * n * np.log(cfg.h)
            + cfg.b * cfg.d * _lgamma1(n))


def main(cfg: Config) -> None:
    print(f"a={cfg.a:g} d={cfg.d} b={cfg.b:g} h={cfg.h:g}")
    for n_max in cfg.n_max_list:
        n = np.unique(np.geomspace(3, n_max, 4000).astype(int)).astype(float)
        print(f"n_max={n_max:>8d}  last-quarter slope {tail_slope(n, log_ratio(cfg, n)):+.5f}")
    print(f"first n where the ratio increases: {fail_other_powers_onset(cfg.b)}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--b", type=float, default=Config.b)
    main(Config(b=p.parse_args().b))
