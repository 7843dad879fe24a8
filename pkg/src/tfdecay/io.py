"""Plain CSV readers and writers with a schema line and a metadata header.

Every file starts with ``# schema=<name> version=1``, followed by ``# key=value``
metadata lines, then a header row. Floats are written with ``repr`` so identical
inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from .hermite import Grid, HermiteSeries, SampledFunction
from .bargmann import EntireSeries

VERSION = 1


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def render(schema: str, header, rows, meta: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# schema={schema} version={VERSION}\n")
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={_fmt(v)}\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for r in rows:
        wr.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_table(path, schema: str, header, rows, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(schema, header, rows, meta))
    return path


def read_table(path) -> tuple[str, dict, list[str], list[list[str]]]:
    """(schema, meta, header, rows); raises ValueError on a bad first line."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# schema="):
        raise ValueError(f"{path}: missing schema line")
    head = dict(tok.split("=", 1) for tok in lines[0][2:].split())
    if int(head.get("version", -1)) != VERSION:
        raise ValueError(f"{path}: unsupported version {head.get('version')}")
    meta, i = {}, 1
    while i < len(lines) and lines[i].startswith("#"):
        k, _, v = lines[i][1:].strip().partition("=")
        meta[k] = v
        i += 1
    rd = list(csv.reader(lines[i:]))
    return head["schema"], meta, rd[0], rd[1:]


# ---------------------------------------------------------------- series

def write_series(path, s, meta: dict | None = None) -> Path:
    d = s.dim
    header = [f"alpha_{j + 1}" for j in range(d)] + ["log_magnitude", "phase_re", "phase_im"]
    rows = [list(map(int, a)) + [lm, p.real, p.imag]
            for a, lm, p in zip(s.indices, s.log_mag, s.phase)]
    m = {"dim": d, "taylor": isinstance(s, EntireSeries)}
    m.update({k: v for k, v in s.meta.items() if isinstance(v, (str, int, float))})
    m.update(meta or {})
    return write_table(path, "series", header, rows, m)


def read_series(path):
    schema, meta, header, rows = read_table(path)
    if schema != "series":
        raise ValueError(f"{path}: expected series, found {schema}")
    d = int(meta["dim"])
    arr = np.array([[float(x) for x in r] for r in rows]).reshape(-1, d + 3)
    cls = EntireSeries if meta.get("taylor") == "1" else HermiteSeries
    return cls(d, arr[:, :d].astype(int), arr[:, d], arr[:, d + 1] + 1j * arr[:, d + 2],
               {"source": meta.get("source", "file")})


# ---------------------------------------------------------------- samples

def write_samples(path, f: SampledFunction, meta: dict | None = None) -> Path:
    g = f.grid
    mesh = [m.ravel() for m in g.mesh()]
    v = np.asarray(f.values).ravel()
    header = [f"x_{j + 1}" for j in range(g.dim)] + ["re", "im"]
    rows = ([m[i] for m in mesh] + [v[i].real, v[i].imag] for i in range(v.size))
    m = {"dim": g.dim, "R": g.R, "points": g.points, "delta": g.delta}
    m.update(meta or {})
    return write_table(path, "samples", header, rows, m)


def read_samples(path) -> SampledFunction:
    schema, meta, header, rows = read_table(path)
    if schema != "samples":
        raise ValueError(f"{path}: expected samples, found {schema}")
    d, n = int(meta["dim"]), int(meta["points"])
    grid = Grid(d, float(meta["R"]), n)
    arr = np.array([[float(x) for x in r] for r in rows])
    vals = (arr[:, d] + 1j * arr[:, d + 1]).reshape((n,) * d)
    return SampledFunction(grid, vals)


# ---------------------------------------------------------------- reports

REPORT_HEADER = ["test_id", "input_rate", "paper_bound", "measured", "slack", "pass"]


def write_report(path, rows, meta: dict | None = None) -> Path:
    return write_table(path, "report", REPORT_HEADER, rows, meta)


def write_conjugate(path, v, phi_star, closed=None, meta: dict | None = None) -> Path:
    header = ["v", "phi_star"] + (["closed_form", "residual"] if closed is not None else [])
    rows = []
    for i, (a, b) in enumerate(zip(v, phi_star)):
        row = [a, b]
        if closed is not None:
            row += [closed[i], b - closed[i]]
        rows.append(row)
    return write_table(path, "conjugate", header, rows, meta)


def write_weights(path, rows, meta: dict | None = None) -> Path:
    return write_table(path, "weights", ["name", "value", "settled"], rows, meta)
