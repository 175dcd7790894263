"""Command-line front end: ``hambif <command> [options]``.

Every command writes its artifact (``--format`` csv, json or svg) plus a
``result.json`` summary and a ``manifest.json`` holding the full
configuration, into ``--out``.  Failures exit non-zero and print a JSON error
object on stderr (also saved as ``error.json`` when the output directory is
usable).  ``HAMBIF_WORKERS`` sets the worker count for sliced sweeps.
"""
from __future__ import annotations

import argparse
import json
import os
import platform
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import bvp as B
from . import catastrophe as C
from . import export as X
from . import georattle as R
from . import singular as G
from . import systems as S
from .integrate import METHODS, FlowSpec

COMMANDS = (
    "bratu-fold",
    "sweep",
    "continue",
    "locate-umbilic",
    "level-set",
    "conjugate-locus",
    "pitchfork",
    "catastrophe-d4",
    "swallowtail",
)

_DEFAULT_SCENARIO = {
    "bratu-fold": "bratu",
    "sweep": "example5_fold",
    "continue": "example5_fold",
    "locate-umbilic": "henon_heiles",
    "level-set": "henon_heiles",
    "pitchfork": "planar_pitchfork",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    scenario: str | None = None
    method: str = "sv"
    steps: int = 20
    tau: float | None = None
    windows: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    out_format: str = "csv"
    out_path: str = "out"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if int(self.steps) < 1:
            raise ConfigError("steps must be >= 1")
        if self.tau is not None and not self.tau > 0:
            raise ConfigError("tau must be positive")
        if self.out_format not in ("csv", "json", "svg"):
            raise ConfigError(f"unknown format {self.out_format!r}")


# ---------------------------------------------------------------------------
# scenario resolution


def resolve_scenario(ref: str) -> S.Scenario:
    """A scenario file path, or the name of a packaged scenario."""
    p = Path(ref)
    if p.suffix == ".ini" or p.exists():
        return S.load_scenario(p)
    pkg = resources.files("hambif") / "scenarios" / f"{ref}.ini"
    if pkg.is_file():
        with resources.as_file(pkg) as path:
            return S.load_scenario(path)
    if ref in S.CATALOG_NAMES:
        return S.Scenario(name=ref)
    raise ConfigError(f"no scenario named {ref!r}")


def _window(cfg: RunConfig, sc: S.Scenario | None, key: str, default=None):
    if cfg.windows.get(key) is not None:
        return list(cfg.windows[key])
    if sc is not None and key in sc.windows:
        return list(sc.windows[key])
    if default is None:
        raise ConfigError(f"missing window {key!r}")
    return list(default)


def _grid(vals, default_count: int) -> np.ndarray:
    lo, hi = vals[0], vals[1]
    count = int(vals[2]) if len(vals) > 2 else default_count
    return np.linspace(lo, hi, count)


def _box(vals) -> np.ndarray:
    if len(vals) % 2:
        raise ConfigError("box needs lo hi pairs")
    return np.asarray(vals, dtype=float).reshape(-1, 2)


def _setup(cfg: RunConfig):
    sc = resolve_scenario(cfg.scenario or _DEFAULT_SCENARIO[cfg.command])
    bvp = sc.bvp()
    tau = cfg.tau if cfg.tau is not None else bvp.tau
    if cfg.tau is not None and cfg.tau != bvp.tau:
        sc.tau = cfg.tau
        bvp = sc.bvp()
    spec = None if isinstance(bvp.system, S.ExplicitSymplecticMap) else FlowSpec(cfg.method, int(cfg.steps), float(tau))
    return sc, bvp, spec


# ---------------------------------------------------------------------------
# commands; each returns (artifact, summary dict)


def cmd_bratu_fold(cfg: RunConfig):
    sc, bvp, spec = _setup(cfg)
    mu_lo, mu_hi = _window(cfg, sc, "mu", (0.0, 4.0))[:2]
    c0 = float(cfg.options.get("C0", 1.0))
    y0 = float(cfg.options.get("y0", 0.5))
    seed = B.shoot(bvp, spec, [c0], [y0])
    br = B.continue_branch(bvp, spec, seed, mu_bounds=(mu_lo, mu_hi), y_bounds=20.0)
    folds = br.folds()
    summary = {
        "fold_C": [float(f.mu[0]) for f in folds],
        "fold_y": [f.y.tolist() for f in folds],
        "C_star": float(folds[0].mu[0]) if folds else None,
        "branch_points": len(br),
        "stop_reason": br.reason,
    }
    return B.BifurcationDiagram([br]), summary


def cmd_sweep(cfg: RunConfig):
    sc, bvp, spec = _setup(cfg)
    mu = _grid(_window(cfg, sc, "mu"), 41)
    ywin = _window(cfg, sc, "y")
    starts = _multistart(ywin, bvp.n, int(cfg.options.get("n_starts", 11)))
    d = B.sweep(bvp, spec, mu, starts)
    return d, {"branches": len(d.branches), "points": len(d.points()),
               "folds": [[float(f.mu[0]), *f.y.tolist()] for f in d.folds()]}


def _multistart(ywin, n: int, count: int) -> np.ndarray:
    if len(ywin) % 2 == 1:
        count = int(ywin[-1])
        ywin = ywin[:-1]
    box = _box(ywin)
    if len(box) == 1:
        box = np.repeat(box, n, axis=0)
    axes = [np.linspace(lo, hi, count) for lo, hi in box]
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(axes))


def cmd_continue(cfg: RunConfig):
    sc, bvp, spec = _setup(cfg)
    mu_lo, mu_hi = _window(cfg, sc, "mu")[:2]
    mu0 = float(cfg.options.get("mu0", 0.5 * (mu_lo + mu_hi)))
    y0 = np.atleast_1d(np.asarray(cfg.options.get("y0", np.zeros(bvp.n)), dtype=float))
    ds = float(cfg.options.get("ds", 1e-2))
    seed = B.shoot(bvp, spec, [mu0], y0)
    branches = [
        B.continue_branch(bvp, spec, seed, ds=ds, mu_bounds=(mu_lo, mu_hi), direction=s) for s in (1, -1)
    ]
    d = B.BifurcationDiagram(branches)
    return d, {"seed": {"mu": mu0, "y": seed.y.tolist()}, "stop_reasons": [b.reason for b in branches],
               "folds": [[float(f.mu[0]), *f.y.tolist()] for f in d.folds()]}


def cmd_locate_umbilic(cfg: RunConfig):
    sc, bvp, spec = _setup(cfg)
    shape = int(_window(cfg, sc, "shape", (41,))[0])
    if "seed" in cfg.options:
        seed = np.asarray(cfg.options["seed"], dtype=float)
    else:
        seed, _ = G.umbilic_seed_scan(bvp, spec, _box(_window(cfg, sc, "box")), (shape,) * 3)
    pt = G.locate_umbilic(bvp, spec, seed)
    summary = {"u": pt.u.tolist(), "residual_norm": pt.residual_norm, "corank": pt.corank,
               "converged": pt.converged, "scale": pt.scale, "seed": np.asarray(seed).tolist()}
    table = X.Table(["u0", "u1", "u2", "residual_norm", "corank"], [[*pt.u, pt.residual_norm, pt.corank]],
                    plot=(1, 2), kind="umbilic")
    return table, summary


def cmd_level_set(cfg: RunConfig):
    sc, bvp, spec = _setup(cfg)
    shape = int(_window(cfg, sc, "shape", (41,))[0])
    if "center" in cfg.options:
        center = np.asarray(cfg.options["center"], dtype=float)
        hw = float(cfg.options.get("half_width", 0.5))
        box = np.column_stack([center - hw, center + hw])
    else:
        box = _box(_window(cfg, sc, "box"))
        center = box.mean(axis=1)
    L = G.level_bifurcation_set(bvp, spec, box, shape)
    summary = {"vertices": len(L), "box": box.tolist(), "shape": shape, "empty_reason": L.empty_reason}
    if L.jac_at_vertices is not None and len(L):
        ck = G.corank(L.jac_at_vertices)
        summary["corank_counts"] = np.bincount(np.atleast_1d(ck), minlength=3).tolist()
    if cfg.options.get("ridges") and box.shape[0] == 3:
        pt = G.locate_umbilic(bvp, spec, center)
        summary["corank2_point"] = {"u": pt.u.tolist(), "residual_norm": pt.residual_norm, "corank": pt.corank}
        rg = G.cusp_ridges(bvp, spec, pt.u, float(box[0, 1] - box[0, 0]) / 2, shape)
        summary["ridges"] = len(rg.ridges)
        summary["ridge_degree"] = rg.degree
    return L, summary


def cmd_conjugate_locus(cfg: RunConfig):
    name = cfg.options.get("surface", "ellipsoid")
    surf = S.hypersurface_catalog(name)
    q = R.project_to_surface(surf, surf.q_star)
    K = int(cfg.options.get("rays", 200))
    rays = K if len(q) == 3 else R.sphere_rays(K)
    h = float(cfg.options.get("h", 0.005))
    loc = R.conjugate_locus(surf, q, rays, h=h, max_arc=cfg.options.get("max_arc"))
    fin = np.isfinite(loc.arc)
    summary = {
        "surface": name, "q_star": q.tolist(), "rays": K, "h": h, "max_arc": loc.max_arc,
        "degenerate_rays": int(fin.sum()),
        "arc_min": float(loc.arc[fin].min()) if fin.any() else None,
        "arc_max": float(loc.arc[fin].max()) if fin.any() else None,
        "cusps": len(loc.cusp_rays),
        "corank_counts": np.bincount(loc.corank[fin], minlength=3).tolist() if fin.any() else [],
    }
    return loc, summary


def cmd_pitchfork(cfg: RunConfig):
    sc, bvp, spec = _setup(cfg)
    mu = _window(cfg, sc, "mu")[:2]
    yw = _window(cfg, sc, "y")
    yw = yw[:-1] if len(yw) % 2 else yw
    box = _box(yw)
    ywin = box[0].tolist() if len(box) == 1 else box

    def run(steps):
        sp = FlowSpec(spec.method, int(steps), spec.tau)
        d = B.trace_diagram(bvp, sp, mu, ywin, ds=1e-2, y_bounds=3.0 * max(1.0, float(np.abs(box).max())))
        return d, B.pitchfork_break(d, mu, bvp=bvp, spec=sp)

    d, brk = run(spec.steps)
    summary = {"steps": spec.steps, "break": brk,
               "folds": [[float(f.mu[0]), *f.y.tolist()] for f in d.folds()]}
    if "compare_steps" in cfg.options:
        m = int(cfg.options["compare_steps"])
        _, brk2 = run(m)
        summary["compare_steps"] = m
        summary["compare_break"] = brk2
        summary["break_ratio"] = brk2 / brk if brk > 0 else None
    return d, summary


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("HAMBIF_WORKERS", "1")))
    except ValueError:
        raise ConfigError("HAMBIF_WORKERS must be an integer")


def cmd_catastrophe_d4(cfg: RunConfig):
    kind = cfg.options.get("kind", "minus")
    mu4 = float(cfg.options.get("mu4", 0.0))
    mu3 = _grid(cfg.windows.get("mu") or (-0.2, 0.2, 41), 41)
    grid = int(cfg.options.get("grid", 128))
    window = float(cfg.options.get("window", 2.0))
    ls = C.d4_level_set(kind, mu3, mu4, grid=grid, window=window, workers=_workers())
    row, norm = ls.vertex()
    summary = {
        "kind": ls.kind, "mu4": mu4, "slices": len(ls.slices),
        "cusps_per_slice": [s.n_cusps for s in ls.slices],
        "vertex": {"mu": row[:3].tolist(), "xy": row[3:].tolist(), "jacobian_norm": norm},
    }
    return ls, summary


def cmd_swallowtail(cfg: RunConfig):
    mu4 = float(cfg.options.get("mu4", 0.24))
    exact = C.swallowtail_points(mu4)
    traced = C.trace_swallowtails(mu4) if mu4 != 0.0 else []
    rows = [["closed_form", *p.xy, *p.mu] for p in exact] + [["traced", *p.xy, *p.mu] for p in traced]
    err = None
    if traced:
        err = max(min(np.hypot(t.xy[0] - e.xy[0], t.xy[1] - e.xy[1]) for e in exact) for t in traced)
    summary = {"mu4": mu4, "closed_form": [asdict(p) for p in exact], "traced": [asdict(p) for p in traced],
               "max_position_error": err}
    return X.Table(["source", "x", "y", "mu1", "mu2", "mu3"], rows, plot=(1, 2), kind="swallowtail"), summary


HANDLERS = {
    "bratu-fold": cmd_bratu_fold,
    "sweep": cmd_sweep,
    "continue": cmd_continue,
    "locate-umbilic": cmd_locate_umbilic,
    "level-set": cmd_level_set,
    "conjugate-locus": cmd_conjugate_locus,
    "pitchfork": cmd_pitchfork,
    "catastrophe-d4": cmd_catastrophe_d4,
    "swallowtail": cmd_swallowtail,
}


def _tolerances() -> dict:
    return {"newton_tol": B.NEWTON_TOL, "corank_tol": 1e-6, "float_format": "repr (shortest round-trip)"}


def run(cfg: RunConfig) -> dict:
    """Execute one command, write artifact + result.json + manifest.json; returns the summary."""
    out = Path(cfg.out_path)
    out.mkdir(parents=True, exist_ok=True)
    artifact, summary = HANDLERS[cfg.command](cfg)
    stem = cfg.command.replace("-", "_")
    art = X.export(artifact, cfg.out_format, out / f"{stem}.{cfg.out_format}", title=cfg.command)
    X.write_json(out / "result.json", summary, schema=f"hambif.result.{stem}")
    manifest = {
        "config": asdict(cfg),
        "versions": {"hambif": __version__, "numpy": np.__version__, "python": platform.python_version()},
        "tolerances": _tolerances(),
        "workers": _workers(),
        "outputs": sorted([art.name, "result.json"]),
    }
    X.write_json(out / "manifest.json", manifest, schema="hambif.manifest")
    return summary


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("usage", message, None)
        sys.exit(2)


def _floats(values):
    return None if values is None else [float(v) for v in values]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hambif", description="Bifurcations of Hamiltonian boundary value problems.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, flow=True):
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--format", default="csv", choices=("csv", "json", "svg"))
        if flow:
            sp.add_argument("--scenario", help="packaged scenario name or path to an .ini file")
            sp.add_argument("--method", default="sv", choices=METHODS)
            sp.add_argument("--steps", type=int, default=20)
            sp.add_argument("--tau", type=float)
            sp.add_argument("--mu", nargs="+", metavar="V", help="parameter window: lo hi [count]")
            sp.add_argument("--y", nargs="+", metavar="V", help="unknown window: lo hi ... [count]")

    sp = sub.add_parser("bratu-fold", help="fold of the Bratu problem in C")
    common(sp)
    sp.add_argument("--C0", type=float, default=1.0)
    sp.add_argument("--y0", type=float, default=0.5)

    sp = sub.add_parser("sweep", help="multistart shooting over a parameter grid")
    common(sp)
    sp.add_argument("--n-starts", type=int, default=11)

    sp = sub.add_parser("continue", help="pseudo-arclength continuation from one solution")
    common(sp)
    sp.add_argument("--mu0", type=float)
    sp.add_argument("--y0", nargs="+", type=float)
    sp.add_argument("--ds", type=float, default=1e-2)

    for name in ("locate-umbilic", "level-set"):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--box", nargs="+", metavar="V", help="chart box: lo hi per coordinate")
        sp.add_argument("--shape", type=int)
        sp.add_argument("--seed", nargs=3, type=float)
        if name == "level-set":
            sp.add_argument("--center", nargs="+", type=float)
            sp.add_argument("--half-width", type=float, default=0.5)
            sp.add_argument("--ridges", action="store_true", help="locate the corank-2 point near the centre and extract cusp ridges around it")

    sp = sub.add_parser("conjugate-locus", help="first conjugate points on a catalog hypersurface")
    common(sp, flow=False)
    sp.add_argument("--surface", default="ellipsoid", choices=S.HYPERSURFACE_NAMES)
    sp.add_argument("--rays", type=int, default=200)
    sp.add_argument("--h", type=float, default=0.005)
    sp.add_argument("--max-arc", type=float)

    sp = sub.add_parser("pitchfork", help="break magnitude of a periodic pitchfork")
    common(sp)
    sp.add_argument("--compare-steps", type=int)

    sp = sub.add_parser("catastrophe-d4", help="level bifurcation set of the (perturbed) D4 unfolding")
    common(sp, flow=False)
    sp.add_argument("--kind", default="minus", choices=("plus", "minus"))
    sp.add_argument("--mu4", type=float, default=0.0)
    sp.add_argument("--mu3", nargs="+", metavar="V", help="slice values: lo hi [count]")
    sp.add_argument("--grid", type=int, default=128)
    sp.add_argument("--window", type=float, default=2.0)

    sp = sub.add_parser("swallowtail", help="swallowtail points of the perturbed hyperbolic umbilic")
    common(sp, flow=False)
    sp.add_argument("--mu4", type=float, default=0.24)
    return p


def config_from_args(a: argparse.Namespace) -> RunConfig:
    d = vars(a)
    windows, options = {}, {}
    for key in ("mu", "y", "box"):
        if d.get(key) is not None:
            windows[key] = _floats(d[key])
    if d.get("shape") is not None:
        windows["shape"] = [d["shape"]]
    if a.command == "catastrophe-d4" and d.get("mu3") is not None:
        windows["mu"] = _floats(d["mu3"])
    skip = {"command", "scenario", "method", "steps", "tau", "out", "format", "mu", "y", "box", "shape", "mu3"}
    for k, v in d.items():
        if k not in skip and v is not None and v is not False:
            options[k] = v
    return RunConfig(
        command=a.command, scenario=d.get("scenario"), method=d.get("method", "sv"),
        steps=d.get("steps", 20), tau=d.get("tau"), windows=windows, options=options,
        out_format=a.format, out_path=a.out,
    )


def _emit_error(kind: str, message: str, out: Path | None) -> None:
    err = {"error": kind, "message": message}
    text = json.dumps(err, sort_keys=True)
    print(text, file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(text + "\n", encoding="utf-8")
        except OSError:
            pass


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = config_from_args(args)
        summary = run(cfg)
    except Exception as exc:  # every failure becomes machine-readable
        _emit_error(type(exc).__name__, str(exc), out)
        return 1
    print(json.dumps(X.jsonable(summary), sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
