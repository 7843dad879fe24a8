"""Command line front end: ``tfdecay <command> [flags]``.

Every command writes plot-ready CSV into ``--out`` (when given) and prints a
short human-readable summary. Exit codes: 0 all checks pass, 1 a check failed,
2 usage error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .certify import certify_hermite, certify_series_tf, hermite_exponential_rate
from .config import DEFAULT_TOL, RunConfig, parse_kv_text
from .constructions import FAMILIES, ConstructionSpec, build
from .errors import TFDecayError, UsageError
from .hermite import Grid, HermiteSeries, analyze, safe_radius, synthesize
from .suite import CRITERIA, run_suite
from .theorems import ALIASES, THEOREMS, run_theorem
from .weights import Conjugate, parse_weight, weight_coefficients

COMMANDS = ("weights", "conjugate", "analyze", "synthesize", "certify", "construct",
            "verify", "suite")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tfdecay", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--weight", help="family:params, e.g. power:1.5, logpower:1, gaussian")
        sp.add_argument("--d", type=int, help="dimension")
        sp.add_argument("--R", type=float, help="grid half-width")
        sp.add_argument("--N", type=int, help="Hermite order")
        sp.add_argument("--nmax", type=int, help="series truncation")
        sp.add_argument("--lambda", dest="lambdas", type=_floats, help="comma list")
        sp.add_argument("--r", dest="rs", type=_floats, help="comma list")
        sp.add_argument("--eps", type=_floats, help="comma list")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--tol", help="key=value tolerance overrides file")
        sp.add_argument("--config", help="key=value run config file (flags win)")
        return sp

    common(sub.add_parser("weights", help="coefficient table for a weight"))
    c = common(sub.add_parser("conjugate", help="Young conjugate table"))
    c.add_argument("--vmax", type=float, default=100.0)
    c.add_argument("--points", type=int, default=201)
    a = common(sub.add_parser("analyze", help="samples CSV -> series CSV"))
    a.add_argument("--in", dest="inp", required=True)
    s = common(sub.add_parser("synthesize", help="series CSV -> samples CSV"))
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--points", type=int)
    ce = common(sub.add_parser("certify", help="TF and Hermite certificates of a series"))
    ce.add_argument("--in", dest="inp", required=True)
    ce.add_argument("--mode", choices=("uniform", "coordinate"), default="uniform")
    co = common(sub.add_parser("construct", help="build a series from a family"))
    co.add_argument("--family", choices=FAMILIES, required=True)
    co.add_argument("--b", type=float)
    co.add_argument("--eta", type=float)
    co.add_argument("--a", type=float)
    co.add_argument("--poly", help="terms like 3:1.0 or 1,2:0.5;0,0:1 (exponents:coefficient)")
    co.add_argument("--kmax", type=int, default=3)
    v = common(sub.add_parser("verify", help="run the checks for one theorem id"))
    v.add_argument("--theorem", required=True,
                   help="one of " + ", ".join(list(THEOREMS) + list(ALIASES)))
    su = common(sub.add_parser("suite", help="run the acceptance criteria"))
    su.add_argument("--only", type=lambda t: tuple(int(x) for x in t.split(",")))
    su.add_argument("--no-properties", action="store_true")
    return p


def make_config(ns: argparse.Namespace) -> RunConfig:
    base = parse_kv_text(Path(ns.config).read_text()) if ns.config else {}
    tol = DEFAULT_TOL
    if ns.tol:
        tol = tol.updated(parse_kv_text(Path(ns.tol).read_text()))

    def pick(flag, key, conv):
        if flag is not None:
            return flag
        return conv(base[key]) if key in base else None

    cfg = RunConfig(
        command=ns.command,
        weight=pick(ns.weight, "weight", str),
        d=pick(ns.d, "d", int) or 1,
        R=pick(ns.R, "R", float),
        N=pick(ns.N, "N", int),
        n_max=pick(ns.nmax, "nmax", int) or 60,
        lambdas=pick(ns.lambdas, "lambda", _floats) or (),
        rs=pick(ns.rs, "r", _floats) or (),
        eps=pick(ns.eps, "eps", _floats) or (),
        out=pick(ns.out, "out", str),
        tol=tol,
    )
    cfg.validate()
    return cfg


def _out(cfg: RunConfig, name: str) -> Path | None:
    return Path(cfg.out) / name if cfg.out else None


def _fmt_row(row) -> str:
    return "  ".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row)


# ---------------------------------------------------------------- commands

def cmd_weights(cfg: RunConfig, ns) -> int:
    if not cfg.weight:
        raise UsageError("weights needs --weight")
    w = parse_weight(cfg.weight)
    wc = weight_coefficients(w, d=max(cfg.d, 2))
    rows = [(name, float(v), bool(ok)) for name, v, ok in wc.rows()]
    for r in rows:
        print(f"{r[0]:<24} {r[1]:.8g}  {'settled' if r[2] else 'unsettled'}")
    if cfg.out:
        io.write_weights(_out(cfg, "weights.csv"), rows, {"config": cfg.echo()})
    return 0


def _closed_conjugate(w, v):
    if w.family == "logpower":
        a = w.a
        if a == 0:
            return None
        return a * (1 + a) ** (-(1 + a) / a) * v ** ((1 + a) / a)
    if w.family in ("power", "gaussian_limit"):
        a = w.a
        q = v / a
        return np.where(q > 1.0, q * np.log(np.maximum(q, 1.0)) - q, -1.0)
    return None


def cmd_conjugate(cfg: RunConfig, ns) -> int:
    if not cfg.weight:
        raise UsageError("conjugate needs --weight")
    w = parse_weight(cfg.weight)
    conj = Conjugate(w)
    v = np.linspace(0.0, ns.vmax, ns.points)
    ps = conj.evaluate(v)
    closed = _closed_conjugate(w, v)
    worst = float(np.max(np.abs(ps - closed))) if closed is not None else math.nan
    print(f"phi* of {w.name} on [0, {ns.vmax:g}], {ns.points} points"
          + (f"; max |residual| vs closed form {worst:.3g}" if closed is not None else ""))
    if conj.cutoff is not None:
        print(f"phi* = +inf beyond v = {conj.cutoff:.6g}")
    if cfg.out:
        io.write_conjugate(_out(cfg, "conjugate.csv"), v, ps, closed,
                           {"config": cfg.echo(), "weight": w.name})
    return 0


def cmd_analyze(cfg: RunConfig, ns) -> int:
    f = io.read_samples(ns.inp)
    N = cfg.N if cfg.N is not None else 32
    s = analyze(f, N)
    print(f"analyzed {f.values.size} samples into {len(s)} coefficients (N={N})")
    if cfg.out:
        io.write_series(_out(cfg, "series.csv"), s, {"config": cfg.echo()})
    return 0


def cmd_synthesize(cfg: RunConfig, ns) -> int:
    s = io.read_series(ns.inp)
    N = s.max_order
    R = cfg.R if cfg.R is not None else max(8.0, safe_radius(N))
    grid = Grid(s.dim, R, ns.points) if ns.points else Grid.for_order(N, s.dim, R=R)
    f = synthesize(s, grid)
    print(f"synthesized {len(s)} coefficients on {grid.points}^{s.dim} points, R={R:g}")
    if cfg.out:
        io.write_samples(_out(cfg, "samples.csv"), f, {"config": cfg.echo()})
    return 0


def cmd_certify(cfg: RunConfig, ns) -> int:
    s = io.read_series(ns.inp)
    if not isinstance(s, HermiteSeries):
        raise UsageError("certify expects a Hermite series file")
    w = parse_weight(cfg.weight or "gaussian")
    R = cfg.R if cfg.R is not None else 10.0
    grid = Grid.for_order(int(s.indices.max()), s.dim, R=R)
    tf = certify_series_tf(s, w, grid, mode=ns.mode, tol=cfg.tol)
    tf = tf if isinstance(tf, list) else [tf]
    rows = []
    for c in tf:
        tag = f"tf_{ns.mode}" + (f"[axis={c.axis}]" if c.axis is not None else "")
        rows.append((tag, math.nan, math.nan, c.rate, c.residual, c.settled))
    if w.family == "gaussian_limit":
        h = hermite_exponential_rate(s, cfg.tol)
        rows.append(("hermite_exponential", math.nan, math.nan, h.rate, h.residual, h.settled))
    else:
        rg = cfg.rs or tuple(np.round(np.arange(0.05, 4.0001, 0.05), 10))
        hc = certify_hermite(s, w, rg, tol=cfg.tol)
        rows.append(("hermite", math.nan, math.nan, hc.rate, hc.residual, hc.settled))
        rows.append(("hermite_support_cutoff", math.nan, math.nan,
                     float(hc.extra["support_cutoff"]), math.nan, True))
    for r in rows:
        print(_fmt_row(r))
    if cfg.out:
        io.write_report(_out(cfg, "certificate.csv"), rows,
                        {"config": cfg.echo(), "weight": w.name})
    return 0


def _parse_poly(text: str, d: int):
    terms = []
    for chunk in text.split(";"):
        exps, _, coef = chunk.partition(":")
        e = tuple(int(x) for x in exps.split(","))
        if len(e) != d:
            raise UsageError(f"term {chunk!r} needs {d} exponents")
        terms.append((e, float(coef or 1.0)))
    return tuple(terms)


def cmd_construct(cfg: RunConfig, ns) -> int:
    spec = ConstructionSpec(
        family=ns.family, d=cfg.d, n_max=cfg.n_max,
        r=cfg.rs[0] if cfg.rs else None, b=ns.b, weight=cfg.weight, eta=ns.eta,
        lam=cfg.lambdas[0] if cfg.lambdas else None, a=ns.a, k_max=ns.kmax,
        poly=_parse_poly(ns.poly, cfg.d) if ns.poly else None)
    s = build(spec, cfg.tol)
    print(f"{spec.family}: {len(s)} coefficients, max order {s.max_order}")
    if cfg.out:
        io.write_series(_out(cfg, "series.csv"), s, {"config": cfg.echo(), "spec": spec.echo()})
    return 0


def _report(rows, cfg: RunConfig, name: str) -> int:
    failed = [r for r in rows if not r.passed]
    for r in rows:
        print(("PASS " if r.passed else "FAIL ") + _fmt_row(r.row()[:-1])
              + (f"  [{r.note}]" if r.note else ""))
    if cfg.out:
        io.write_report(_out(cfg, name), [r.row() for r in rows], {"config": cfg.echo()})
    if failed:
        print(f"{len(failed)} of {len(rows)} checks failed; first: {failed[0].test_id}",
              file=sys.stderr)
        return 1
    return 0


def cmd_verify(cfg: RunConfig, ns) -> int:
    if ns.theorem not in THEOREMS and ns.theorem not in ALIASES:
        raise UsageError(f"unknown theorem id {ns.theorem!r}")
    rows = run_theorem(ns.theorem, cfg.d, cfg.weight, cfg.tol, cfg.lambdas or None)
    return _report(rows, cfg, "verify.csv")


def cmd_suite(cfg: RunConfig, ns) -> int:
    nums = ns.only or tuple(sorted(CRITERIA))
    if any(k not in CRITERIA for k in nums):
        raise UsageError("criteria are numbered 1..10")
    results = run_suite(nums, include_properties=not ns.no_properties)
    rows = []
    for res in results:
        print(res.report())
        for c in res.checks:
            rows.append((f"{res.number}:{c.label}", math.nan, math.nan, c.value, math.nan,
                         c.passed))
    if cfg.out:
        io.write_report(_out(cfg, "suite.csv"), rows, {"config": cfg.echo()})
    bad = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(bad)}/{len(results)} criteria pass"
          + (f"; failing: {bad}" if bad else ""))
    return 1 if bad else 0


HANDLERS = {"weights": cmd_weights, "conjugate": cmd_conjugate, "analyze": cmd_analyze,
            "synthesize": cmd_synthesize, "certify": cmd_certify, "construct": cmd_construct,
            "verify": cmd_verify, "suite": cmd_suite}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError("missing command; choose one of " + ", ".join(COMMANDS))
        cfg = make_config(ns)
        return HANDLERS[ns.command](cfg, ns)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (TFDecayError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
