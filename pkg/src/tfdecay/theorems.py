"""Named verification runs behind ``tfdecay verify --theorem ID``.

Each runner builds its inputs from :mod:`tfdecay.constructions`, measures them
with :mod:`tfdecay.certify` and returns report rows. Numeric aliases 1.1, 1.2
and 1.3 point at the three characterisations (log weight, t^2, general weight).
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .certify import (ImplicationReport, certify_hermite, certify_series_tf,
                      check_gi_sequence_gap, hermite_power_rate, verify_implication)
from .config import DEFAULT_TOL, Tolerances
from .constructions import (ConstructionSpec, build, counterexample_eta, diag_counterexample,
                            hermite_rate, tensor_power, verify_construction)
from .errors import ConstantUnavailable
from .hermite import Grid
from .suite import criterion_8
from .weights import WeightFunction, gaussian_limit, logpower, parse_weight, power


def _n_for(d: int) -> int:
    return {1: 60, 2: 40}.get(d, 16)


def log_case(d: int, w: WeightFunction | None, tol: Tolerances, lams=None) -> list:
    """P(x) e^{-|x|^2/2}: log+ rate equals deg P and Hermite support stops at deg P."""
    w = logpower(0.0)
    rows = []
    for deg in (1, 2, 3):
        poly = (((deg,) + (0,) * (d - 1), 1.0), ((0,) * d, 0.5))
        s = build(ConstructionSpec("poly_gaussian", d=d, poly=poly), tol)
        rate = certify_series_tf(s, w, Grid.for_order(deg, d, R=10.0 if d < 3 else 6.0),
                                 tol=tol).rate
        bound = deg * (1 + tol.theorem_slack)
        cut = certify_hermite(s, w, [1.0], tol=tol).extra["support_cutoff"]
        rows.append(ImplicationReport(f"log-case:deg={deg}:tf", deg, bound, rate,
                                      bound / rate if rate > 0 else math.inf, rate <= bound))
        rows.append(ImplicationReport(f"log-case:deg={deg}:support", deg, deg, cut, 1.0,
                                      cut == deg))
    return rows


def _gauss_width_series(lam: float, d: int, n: int):
    s1 = build(ConstructionSpec("gaussian_width", b=0.5 - lam, n_max=n))
    return s1 if d == 1 else tensor_power(s1, d, n)


def t2_chain(d: int, w: WeightFunction | None, tol: Tolerances, lams=None) -> list:
    """Hermite rate to TF (h = 0.3/sqrt d) and TF to Hermite, uniform and per coordinate."""
    g = gaussian_limit()
    n = _n_for(d)
    h = 0.3 / math.sqrt(d)
    s = build(ConstructionSpec("hermite_rate", d=d, r=-math.log(h), n_max=n), tol)
    grid = Grid.for_order(n, d, R=8.0)
    rows = [verify_implication("hermite_to_tf", g, d, s, grid, tol=tol,
                               test_id=f"t2-chain:hermite_to_tf:h={h:.4g}")]
    rows += t2_coordinates(d, w, tol, lams, uniform=True)
    return rows


def t2_coordinates(d: int, w: WeightFunction | None, tol: Tolerances, lams=None,
                   uniform: bool = False) -> list:
    g = gaussian_limit()
    n = _n_for(d)
    rows = []
    for lam in lams or (0.1, 0.2):
        if not 0 < lam < 0.25:
            continue
        sb = _gauss_width_series(lam, d, n)
        grid = Grid.for_order(n, d, R=8.0)
        if uniform:
            rows.append(verify_implication("tf_to_hermite", g, d, sb, grid, tol=tol,
                                           test_id=f"t2-chain:tf_to_hermite:lambda={lam:g}"))
        if d >= 2:
            rows.append(verify_implication("coordinate_to_hermite", g, d, sb, grid, tol=tol,
                                           test_id=f"t2-coordinates:lambda={lam:g}"))
    return rows


def _envelope(w: WeightFunction, d: int, r: float, tol: Tolerances):
    return hermite_rate(r, d, _n_for(d), w)


def weighted(d: int, w: WeightFunction | None, tol: Tolerances, lams=None) -> list:
    """Weighted envelope series at r = 1 in both directions."""
    w = w or logpower(1.0)
    s = _envelope(w, d, 1.0, tol)
    grid = Grid.for_order(_n_for(d), d, R=10.0)
    return [verify_implication("hermite_to_tf", w, d, s, grid, tol=tol,
                               test_id=f"weighted:hermite_to_tf:{w.name}"),
            verify_implication("tf_to_hermite", w, d, s, grid, tol=tol,
                               test_id=f"weighted:tf_to_hermite:{w.name}")]


def general_coordinates(d: int, w: WeightFunction | None, tol: Tolerances, lams=None) -> list:
    w = w or logpower(1.0)
    d = max(d, 2)
    s = _envelope(w, d, 1.0, tol)
    grid = Grid.for_order(_n_for(d), d, R=10.0)
    return [verify_implication("coordinate_to_hermite", w, d, s, grid, tol=tol,
                               test_id=f"general-coordinates:{w.name}")]


def coordinate_success(d: int, w: WeightFunction | None, tol: Tolerances, lams=None) -> list:
    w = w or logpower(1.0)
    d = max(d, 2)
    s = _envelope(w, d, 1.0, tol)
    grid = Grid.for_order(_n_for(d), d, R=10.0)
    return [verify_implication("coordinate_to_hermite_gi", w, d, s, grid, tol=tol,
                               test_id=f"coordinate-success:{w.name}")]


def coordinates_log(d: int, w: WeightFunction | None, tol: Tolerances, lams=None) -> list:
    """Coordinate decay for (log+ t)^{1+a} gives e^{-r|alpha|^{(a+1)/a}} up to the stated r."""
    rows = []
    d = max(d, 2)
    for a in (1.0, 2.0):
        wa = logpower(a)
        s = _envelope(wa, d, 1.0, tol)
        grid = Grid.for_order(_n_for(d), d, R=10.0)
        certs = certify_series_tf(s, wa, grid, mode="coordinate", tol=tol)
        lam = max(c.rate for c in certs)
        p = (a + 1) / a
        bound = a / (d * (a + 1) ** p) * lam ** (-1.0 / a)
        meas = hermite_power_rate(s, p, tol).rate
        need = (1 - tol.theorem_slack) * bound
        rows.append(ImplicationReport(f"coordinates-log:a={a:g}", lam, bound, meas,
                                      meas / need, meas >= need))
    return rows


def counterexample(d: int, w: WeightFunction | None, tol: Tolerances, lams=None) -> list:
    """Diagonal construction for a weight without Gaussian interpolation (default t)."""
    w = w or power(1.0)
    d = max(d, 2)
    rows = []
    for lam in lams or (1.0, 0.3, 0.1):
        spec = ConstructionSpec("diag_counterexample", d=d, weight=w.name, lam=lam, n_max=60)
        s = diag_counterexample(w, counterexample_eta(w, lam, tol), d, spec.n_max)
        # the diagonal excess depends on eps and eta only through eps^2 eta
        eps = tuple(c / math.sqrt(lam) for c in (1.0, 2.0, 4.0))
        rep = verify_construction(s, spec, w, eps_list=eps, tol=tol)
        for r in rep.rows:
            rows.append(ImplicationReport(f"counterexample:lambda={lam:g}:{r.test_id}",
                                          lam, 0.0, r.value, math.nan, r.passed, note=r.note))
    return rows


def counterexample_ta(d: int, w: WeightFunction | None, tol: Tolerances, lams=None) -> list:
    res = criterion_8(tol)
    return [ImplicationReport(f"counterexample-ta:{c.label}", math.nan, math.nan, c.value,
                              math.nan, c.passed, note=c.target) for c in res.checks]


def notgi(d: int, w: WeightFunction | None, tol: Tolerances, lams=None) -> list:
    w = w or power(1.0)
    d = max(d, 2)
    rep = check_gi_sequence_gap(w, d, 1.0, [1.0, 0.5], n_max=60, n_min=30)
    rows = []
    for eps, y in rep.log_ratio.items():
        slope = float(np.polyfit(rep.n, y, 1)[0])
        rows.append(ImplicationReport(f"notgi:{w.name}:d={d}:eps={eps:g}", 1.0, 0.0, slope,
                                      math.nan, slope > 0))
    return rows


THEOREMS: dict[str, Callable] = {
    "log-case": log_case,
    "t2-chain": t2_chain,
    "weighted": weighted,
    "t2-coordinates": t2_coordinates,
    "general-coordinates": general_coordinates,
    "coordinate-success": coordinate_success,
    "coordinates-log": coordinates_log,
    "counterexample": counterexample,
    "counterexample-ta": counterexample_ta,
    "notgi": notgi,
}
ALIASES = {"1.1": "log-case", "1.2": "t2-chain", "1.3": "weighted"}


def resolve(theorem_id: str) -> Callable:
    key = ALIASES.get(theorem_id, theorem_id)
    if key not in THEOREMS:
        raise KeyError(theorem_id)
    return THEOREMS[key]


def run_theorem(theorem_id: str, d: int = 2, weight: str | None = None,
                tol: Tolerances = DEFAULT_TOL, lams=None) -> list:
    """Report rows; a constant that cannot be estimated becomes a failing row."""
    fn = resolve(theorem_id)
    w = parse_weight(weight) if weight else None
    try:
        return fn(d, w, tol, lams)
    except ConstantUnavailable as exc:
        return [ImplicationReport(f"{theorem_id}:constant", math.nan, math.nan, math.nan,
                                  math.nan, False, note=str(exc))]
