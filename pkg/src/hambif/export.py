"""Deterministic CSV / JSON / SVG writers for computed results.

Floats are written with ``repr`` (shortest string that round-trips, at most
17 significant digits), so identical inputs give byte-identical files.
Non-finite values become empty CSV cells, ``null`` in JSON.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "SCHEMA_VERSION",
    "fmt",
    "jsonable",
    "write_csv",
    "write_json",
    "write_svg",
    "Table",
    "table_of",
    "export",
]

SCHEMA_VERSION = 1


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def jsonable(obj):
    """Convert numpy containers and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    width = len(header)
    for r in rows:
        r = list(r)
        if len(r) != width:
            raise ValueError(f"row has {len(r)} fields, header has {width}")
        lines.append(",".join(fmt(v) for v in r))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_json(path, obj, schema: str | None = None) -> Path:
    path = Path(path)
    body = jsonable(obj)
    if schema is not None:
        body = {"schema": schema, "schema_version": SCHEMA_VERSION, "data": body}
    path.write_text(json.dumps(body, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b")


def write_svg(path, series: Sequence[tuple], xlabel: str, ylabel: str, title: str = "",
              width: int = 640, height: int = 480) -> Path:
    """Scatter/line plot.  ``series`` items are ``(label, xs, ys, style)`` with style 'line' or 'dots'."""
    path = Path(path)
    xs = np.concatenate([np.asarray(s[1], float).ravel() for s in series]) if series else np.zeros(0)
    ys = np.concatenate([np.asarray(s[2], float).ravel() for s in series]) if series else np.zeros(0)
    ok = np.isfinite(xs) & np.isfinite(ys)
    if ok.any():
        x0, x1, y0, y1 = xs[ok].min(), xs[ok].max(), ys[ok].min(), ys[ok].max()
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    ml, mr, mt, mb = 70, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb

    def X(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    def n(v):
        return f"{v:.2f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        fy = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{n(X(fx))}" y="{mt + ph + 16}" text-anchor="middle">{fx:.4g}</text>')
        out.append(f'<text x="{ml - 6}" y="{n(Y(fy) + 4)}" text-anchor="end">{fy:.4g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{_esc(ylabel)}</text>'
    )
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>')
    for i, s in enumerate(series):
        label, sx, sy = s[0], np.asarray(s[1], float).ravel(), np.asarray(s[2], float).ravel()
        style = s[3] if len(s) > 3 else "line"
        color = _PALETTE[i % len(_PALETTE)]
        good = np.isfinite(sx) & np.isfinite(sy)
        if style == "line" and good.sum() >= 2:
            pts = " ".join(f"{n(X(a))},{n(Y(b))}" for a, b in zip(sx[good], sy[good]))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"><title>{_esc(label)}</title></polyline>')
        else:
            out.append(f'<g fill="{color}"><title>{_esc(label)}</title>')
            out.extend(f'<circle cx="{n(X(a))}" cy="{n(Y(b))}" r="1.6"/>' for a, b in zip(sx[good], sy[good]))
            out.append("</g>")
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def _esc(s: str) -> str:
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class Table:
    """Column-ordered rows plus a default 2D projection for SVG output."""

    def __init__(self, header, rows, plot=(0, 1), groups=None, kind: str = "table"):
        self.header = list(header)
        self.rows = [list(r) for r in rows]
        self.plot = plot
        self.groups = groups  # column index whose value separates polylines
        self.kind = kind

    def column(self, i: int) -> np.ndarray:
        return np.array([float(r[i]) if r[i] is not None else np.nan for r in self.rows])


def table_of(result) -> Table:
    """Tabular view of a diagram, branch, level set, conjugate locus or D4 level set."""
    from .bvp import BifurcationDiagram, Branch
    from .catastrophe import D4LevelSet
    from .georattle import ConjugateLocus
    from .singular import LevelBifurcationSet

    if isinstance(result, Branch):
        result = BifurcationDiagram([result])
    if isinstance(result, BifurcationDiagram):
        pts = [(bi, p) for bi, b in enumerate(result.branches) for p in b.points]
        nm = len(pts[0][1].mu) if pts else 1
        ny = len(pts[0][1].y) if pts else 1
        header = ["branch"] + [f"mu{i}" for i in range(nm)] + [f"y{i}" for i in range(ny)] + ["det", "tag"]
        rows = [[bi, *p.mu, *p.y, p.det, p.tag] for bi, p in pts]
        return Table(header, rows, plot=(1, 1 + nm), groups=0, kind="diagram")
    if isinstance(result, ConjugateLocus):
        d = result.rays.shape[1]
        n = result.endpoints.shape[1]
        header = [f"ray{i}" for i in range(d)] + ["arc"] + [f"q{i}" for i in range(n)] + ["corank", "det_residual", "cusp"]
        cusp = set(int(i) for i in result.cusp_rays)
        rows = [
            [*result.rays[k], result.arc[k], *result.endpoints[k], int(result.corank[k]), result.det_residual[k], int(k in cusp)]
            for k in range(len(result.rays))
        ]
        return Table(header, rows, plot=(d + 2, d + 3) if n > 2 else (d + 1, d + 2), kind="conjugate_locus")
    if isinstance(result, LevelBifurcationSet):
        dc = result.chart_vertices.shape[1]
        dv = result.vertices.shape[1]
        header = [f"u{i}" for i in range(dc)] + [f"v{i}" for i in range(dv)] + ["det"]
        rows = [[*c, *v, d] for c, v, d in zip(result.chart_vertices, result.vertices, result.det_at_vertices)]
        return Table(header, rows, plot=(dc, dc + 1) if dv > 1 else (0, dc), kind="level_set")
    if isinstance(result, D4LevelSet):
        header = ["slice", "branch", "mu1", "mu2", "mu3", "x", "y", "cusp"]
        rows = []
        for si, sl in enumerate(result.slices):
            for bi, (xy, im) in enumerate(zip(sl.branches, sl.images)):
                rows.extend([si, bi, a, b, sl.mu3, x, y, 0] for (x, y), (a, b) in zip(xy, im))
            rows.extend([si, -1, a, b, sl.mu3, x, y, 1] for (x, y), (a, b) in zip(sl.cusp_xy, sl.cusp_mu))
        return Table(header, rows, plot=(2, 3), groups=None, kind="d4_level_set")
    raise TypeError(f"no tabular form for {type(result).__name__}")


def export(result, fmt_name: str, path, title: str = "") -> Path:
    """Write ``result`` as csv, json or svg.  An empty result gives a header-only CSV."""
    t = result if isinstance(result, Table) else table_of(result)
    if fmt_name == "csv":
        return write_csv(path, t.header, t.rows)
    if fmt_name == "json":
        return write_json(path, {"columns": t.header, "rows": t.rows}, schema=f"hambif.{t.kind}")
    if fmt_name == "svg":
        ix, iy = t.plot
        series = []
        if t.groups is not None and t.rows:
            g = t.column(t.groups)
            for val in np.unique(g):
                sel = g == val
                series.append((f"{t.header[t.groups]} {int(val)}", t.column(ix)[sel], t.column(iy)[sel], "line"))
        else:
            series.append((t.kind, t.column(ix), t.column(iy), "dots"))
        return write_svg(path, series, t.header[ix], t.header[iy], title)
    raise ValueError(f"unknown format {fmt_name!r}; expected csv, json or svg")
