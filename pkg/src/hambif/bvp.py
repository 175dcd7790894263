"""Shooting, multistart sweeps and pseudo-arclength continuation.

The unknowns of a separated boundary value problem are the free start
coordinates ``y`` (one per degree of freedom, see
:meth:`SeparatedBVP.start_point`).  The residual is the end-section
defect of the discrete flow started at the corresponding point.  All
Jacobians come from seeding ``y`` (and, for continuation, the active
parameter) with jets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import jets as jt
from .integrate import FlowError, FlowSpec, propagate
from .systems import SeparatedBVP

__all__ = [
    "TAGS",
    "BranchPoint",
    "Branch",
    "BifurcationDiagram",
    "ShootingError",
    "residual",
    "residual_entries",
    "residual_jacobian",
    "shoot",
    "sweep",
    "continue_branch",
    "refine_fold",
    "trace_diagram",
    "pitchfork_break",
]

TAGS = ("regular", "fold", "cusp_candidate", "umbilic_candidate")
NEWTON_TOL = 1e-10


class ShootingError(RuntimeError):
    """Newton did not converge; carries the best iterate."""

    def __init__(self, message: str, y=None, norm: float = np.inf, reason: str = ""):
        super().__init__(message)
        self.y = y
        self.norm = norm
        self.reason = reason


@dataclass
class BranchPoint:
    mu: np.ndarray
    y: np.ndarray
    z_full: np.ndarray
    tag: str = "regular"
    det: float = np.nan

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")
        self.mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        self.y = np.atleast_1d(np.asarray(self.y, dtype=float))
        self.z_full = np.asarray(self.z_full, dtype=float)

    def to_dict(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "y": self.y.tolist(),
            "z_full": self.z_full.tolist(),
            "tag": self.tag,
            "det": None if not np.isfinite(self.det) else float(self.det),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BranchPoint":
        det = d.get("det")
        return cls(d["mu"], d["y"], d["z_full"], d.get("tag", "regular"), np.nan if det is None else det)


@dataclass
class Branch:
    points: list = field(default_factory=list)
    reason: str = ""

    def __len__(self) -> int:
        return len(self.points)

    @property
    def mu(self) -> np.ndarray:
        return np.array([p.mu for p in self.points])

    @property
    def y(self) -> np.ndarray:
        return np.array([p.y for p in self.points])

    def folds(self) -> list:
        return [p for p in self.points if p.tag == "fold"]


@dataclass
class BifurcationDiagram:
    branches: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def points(self) -> list:
        return [p for b in self.branches for p in b.points]

    def folds(self) -> list:
        return [p for b in self.branches for p in b.folds()]

    def to_dict(self) -> dict:
        return {
            "schema": "hambif.diagram/1",
            "meta": self.meta,
            "branches": [{"reason": b.reason, "points": [p.to_dict() for p in b.points]} for b in self.branches],
            "failures": self.failures,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BifurcationDiagram":
        branches = [Branch([BranchPoint.from_dict(p) for p in b["points"]], b.get("reason", "")) for b in d["branches"]]
        return cls(branches, d.get("meta", {}), d.get("failures", []))

    def verify(self, bvp: SeparatedBVP, spec: FlowSpec, tol: float = NEWTON_TOL, param_index: int = 0) -> float:
        """Recompute every stored residual; returns the largest norm and raises if it exceeds ``tol``."""
        worst = 0.0
        for p in self.points():
            r = residual(bvp, spec, p.y, p.mu)
            worst = max(worst, float(np.linalg.norm(r)))
        if worst >= tol:
            raise AssertionError(f"stored point fails residual check: {worst:.3e}")
        return worst


# ---------------------------------------------------------------------------
# residual


def _spec_for(bvp: SeparatedBVP, spec: FlowSpec | None) -> FlowSpec | None:
    if spec is None:
        return None
    if spec.tau != bvp.tau:
        return FlowSpec(spec.method, spec.steps, bvp.tau, spec.with_jets, spec.keep_trajectory)
    return spec


def residual_entries(bvp: SeparatedBVP, spec: FlowSpec | None, y: Sequence, mu) -> list:
    """Residual as a list of entries (jets propagate through)."""
    q, p = bvp.start_point(list(y))
    Q, P = propagate(bvp.system, q, p, mu, _spec_for(bvp, spec))
    return bvp.end_residual(Q, P)


def residual(bvp: SeparatedBVP, spec: FlowSpec | None, y, mu) -> np.ndarray:
    """End-section defect phi(x*, y; mu) - X* (or its affine analogue); batched over leading axes of ``y``."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != bvp.n:
        raise ValueError(f"y must have {bvp.n} entries")
    return jt.values(residual_entries(bvp, spec, [y[..., i] for i in range(bvp.n)], mu))


def _mu_list(bvp, mu) -> list:
    return bvp.system.mu(mu)


def residual_jacobian(bvp: SeparatedBVP, spec: FlowSpec | None, y, mu, param_index: int | None = None):
    """Residual and its Jacobian w.r.t. y (and optionally the parameter ``mu[param_index]``).

    Returns ``(r, J)`` with J of shape (..., n, n) or (..., n, n+1).
    """
    y = np.asarray(y, dtype=float)
    n = bvp.n
    mu = [np.asarray(m, dtype=float) for m in _mu_list(bvp, mu)]
    if param_index is None:
        ys = jt.lift(y)
        entries = residual_entries(bvp, spec, ys, mu)
        return jt.values(entries), jt.tangents(entries, n)
    u = np.concatenate([y, np.broadcast_to(mu[param_index], y.shape[:-1])[..., None]], axis=-1)
    lifted = jt.lift(u)
    mu = list(mu)
    mu[param_index] = lifted[n]
    entries = residual_entries(bvp, spec, lifted[:n], mu)
    return jt.values(entries), jt.tangents(entries, n + 1)


def _point(bvp, spec, y, mu, tag="regular") -> BranchPoint:
    y = np.asarray(y, dtype=float)
    q, p = bvp.start_point(list(y))
    z = np.array([float(v) for v in q + p])
    r, J = residual_jacobian(bvp, spec, y, mu)
    return BranchPoint(np.asarray(_mu_list(bvp, mu), dtype=float), y, z, tag, float(np.linalg.det(J)))


# ---------------------------------------------------------------------------
# Newton shooting


def _newton_batch(bvp, spec, Y0, mu, tol=NEWTON_TOL, maxiter=40, max_halvings=8, polish=12):
    """Damped Newton on a batch of starts; returns (Y, norms, converged, reasons).

    Converged rows keep iterating (up to ``polish`` steps) while the residual
    still decreases; this pulls iterates at double roots, where Newton is only
    linear, well inside the deduplication tolerance.
    """
    Y = np.array(Y0, dtype=float, copy=True)
    K = Y.shape[0]
    reasons = np.array([""] * K, dtype=object)
    with np.errstate(all="ignore"):
        try:
            r, J = residual_jacobian(bvp, spec, Y, mu)
        except FlowError as exc:
            raise ShootingError(str(exc), Y0, np.inf, "flow failure") from exc
    norms = np.linalg.norm(r, axis=-1)
    norms[~np.isfinite(norms)] = np.inf
    active = np.isfinite(norms)
    extra = np.zeros(K, dtype=int)
    reasons[~np.isfinite(norms)] = "flow failure"
    for it in range(maxiter + polish):
        if it >= maxiter:
            active &= norms < tol
        if not active.any():
            break
        idx = np.where(active)[0]
        Ja, ra = J[idx], r[idx]
        finite = np.isfinite(Ja).all(axis=(-2, -1))
        cond = np.full(idx.size, np.inf)
        if finite.any():
            cond[finite] = np.linalg.cond(Ja[finite])
        sing = ~np.isfinite(cond) | (cond > 1e14)
        for k in idx[sing]:
            active[k] = False
            if norms[k] >= tol:
                reasons[k] = "singular Jacobian"
        idx, Ja, ra = idx[~sing], Ja[~sing], ra[~sing]
        if idx.size == 0:
            break
        step = -np.linalg.solve(Ja, ra[..., None])[..., 0]
        lam = np.ones(idx.size)
        pending = np.ones(idx.size, dtype=bool)
        new_r = np.empty_like(ra)
        new_J = np.empty_like(Ja)
        new_n = np.full(idx.size, np.inf)
        for _h in range(max_halvings + 1):
            sel = np.where(pending)[0]
            trial = Y[idx[sel]] + lam[sel, None] * step[sel]
            with np.errstate(all="ignore"):
                try:
                    rt, Jt = residual_jacobian(bvp, spec, trial, mu)
                except FlowError:
                    rt = np.full_like(trial, np.nan)
                    Jt = np.full(trial.shape + (trial.shape[-1],), np.nan)
            nt = np.linalg.norm(rt, axis=-1)
            ok = np.isfinite(nt) & (nt < norms[idx[sel]])
            acc = sel[ok]
            new_r[acc], new_J[acc], new_n[acc] = rt[ok], Jt[ok], nt[ok]
            Y[idx[acc]] = trial[ok]
            pending[acc] = False
            if not pending.any():
                break
            lam[pending] *= 0.5
        for j in np.where(pending)[0]:
            active[idx[j]] = False
            if norms[idx[j]] >= tol:
                reasons[idx[j]] = "damping exhausted"
        done = np.where(~pending)[0]
        r[idx[done]], J[idx[done]], norms[idx[done]] = new_r[done], new_J[done], new_n[done]
        extra[idx] += norms[idx] < tol
        active &= extra < polish
    reasons[active] = "iteration limit"
    converged = norms < tol
    reasons[converged] = ""
    return Y, norms, converged, reasons


def shoot(bvp: SeparatedBVP, spec: FlowSpec | None, mu, y0, tol: float = NEWTON_TOL,
          maxiter: int = 40, max_halvings: int = 8) -> BranchPoint:
    """Newton shooting from ``y0``; raises :class:`ShootingError` with the best iterate on failure."""
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    Y, norms, conv, reasons = _newton_batch(bvp, spec, y0[None, :], mu, tol, maxiter, max_halvings)
    if not conv[0]:
        raise ShootingError(f"shooting failed ({reasons[0]}), |res| = {norms[0]:.3e}", Y[0], norms[0], reasons[0])
    return _point(bvp, spec, Y[0], mu)


# ---------------------------------------------------------------------------
# sweeps


def _dedupe(Y: np.ndarray, tol: float) -> np.ndarray:
    out: list = []
    for y in Y[np.lexsort(Y.T[::-1])] if len(Y) else Y:
        if not any(np.linalg.norm(y - o) < tol for o in out):
            out.append(y)
    return np.array(out).reshape(-1, Y.shape[-1])


def _link(mu_grid, roots: list, jump_factor: float) -> list:
    """Nearest-neighbour linking of per-mu root sets into branches."""
    disp = []
    for a, b in zip(roots[:-1], roots[1:]):
        if len(a) and len(b):
            d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
            disp.extend(d.min(axis=1))
    bound = jump_factor * float(np.median(disp)) if disp else np.inf
    if bound == 0.0:
        bound = np.inf
    branches: list = []
    open_: list = []  # (branch index, last y)
    for k, R in enumerate(roots):
        new_open = []
        used = set()
        if open_ and len(R):
            pairs = sorted(
                (float(np.linalg.norm(R[j] - y)), bi, j) for bi, y in open_ for j in range(len(R))
            )
            taken = set()
            for d, bi, j in pairs:
                if bi in taken or j in used or d > bound:
                    continue
                taken.add(bi)
                used.add(j)
                branches[bi].append((k, R[j]))
                new_open.append((bi, R[j]))
        for j in range(len(R)):
            if j not in used:
                branches.append([(k, R[j])])
                new_open.append((len(branches) - 1, R[j]))
        open_ = new_open
    return branches


def sweep(bvp: SeparatedBVP, spec: FlowSpec | None, mu_grid, y_multistart, param_index: int = 0,
          dedupe_tol: float = 1e-6, jump_factor: float = 10.0) -> BifurcationDiagram:
    """Multistart shooting on each grid value of ``mu[param_index]``; roots linked into branches."""
    mu_grid = np.asarray(mu_grid, dtype=float)
    starts = np.asarray(y_multistart, dtype=float)
    if starts.ndim == 1:
        starts = starts[:, None]
    if mu_grid.size == 0 or starts.size == 0:
        raise ValueError("sweep grids must be non-empty")
    base = np.array(_mu_list(bvp, None), dtype=float)
    roots, mus, failures = [], [], []
    for m in mu_grid:
        mu = base.copy()
        mu[param_index] = m
        try:
            Y, norms, conv, reasons = _newton_batch(bvp, spec, starts, list(mu))
        except ShootingError as exc:
            failures.append({"mu": mu.tolist(), "reason": str(exc)})
            roots.append(np.zeros((0, bvp.n)))
            mus.append(mu)
            continue
        for k in np.where(~conv)[0]:
            failures.append({"mu": mu.tolist(), "start": starts[k].tolist(), "reason": str(reasons[k])})
        roots.append(_dedupe(Y[conv], dedupe_tol))
        mus.append(mu)
    linked = _link(mu_grid, roots, jump_factor)
    diagram = BifurcationDiagram(meta=_meta(bvp, spec, {"mode": "sweep", "param_index": param_index}), failures=failures)
    for chain in linked:
        br = Branch([_point(bvp, spec, y, list(mus[k])) for k, y in chain], "sweep")
        _tag_det_changes(br)
        diagram.branches.append(br)
    return diagram


def root_counts(bvp: SeparatedBVP, spec: FlowSpec | None, mu_grid, y_multistart, param_index: int = 0,
                dedupe_tol: float = 1e-6, y_window=None) -> np.ndarray:
    """Number of distinct converged roots found at each grid value of ``mu[param_index]``.

    With ``y_window`` (a pair or an n x 2 box) only roots inside it are counted.
    """
    d = sweep(bvp, spec, mu_grid, y_multistart, param_index, dedupe_tol)
    mu_grid = np.asarray(mu_grid, dtype=float)
    counts = np.zeros(mu_grid.size, dtype=int)
    box = None
    if y_window is not None:
        box = np.asarray(y_window, dtype=float)
        if box.ndim == 1:
            box = np.tile(box, (bvp.n, 1))
    for p in d.points():
        if box is not None and (np.any(p.y < box[:, 0]) or np.any(p.y > box[:, 1])):
            continue
        counts[np.argmin(np.abs(mu_grid - p.mu[param_index]))] += 1
    return counts


def _tag_det_changes(branch: Branch) -> None:
    for a, b in zip(branch.points[:-1], branch.points[1:]):
        if np.sign(a.det) * np.sign(b.det) < 0 and a.tag == "regular" and b.tag == "regular":
            b.tag = "fold"


def _meta(bvp, spec, extra) -> dict:
    out = {
        "system": bvp.system.label,
        "bvp": bvp.label,
        "tau": bvp.tau,
        "method": None if spec is None else spec.method,
        "steps": None if spec is None else spec.steps,
    }
    out.update(extra)
    return out


# ---------------------------------------------------------------------------
# continuation


def _null_tangent(Fu: np.ndarray, prev: np.ndarray | None) -> np.ndarray:
    n1 = Fu.shape[1]
    if prev is None:
        # last right singular vector spans the kernel of the n x (n+1) Jacobian
        t = np.linalg.svd(Fu)[2][-1]
        return t / np.linalg.norm(t)
    A = np.vstack([Fu, prev[None, :]])
    rhs = np.zeros(n1)
    rhs[-1] = 1.0
    t = np.linalg.solve(A, rhs)
    return t / np.linalg.norm(t)


def _corrector(bvp, spec, u_pred, t, mu_base, param_index, tol, maxiter=12):
    u = u_pred.copy()
    n = bvp.n
    for _ in range(maxiter):
        mu = mu_base.copy()
        mu[param_index] = u[n]
        with np.errstate(all="ignore"):
            r, Fu = residual_jacobian(bvp, spec, u[:n], list(mu), param_index)
        G = np.concatenate([r, [t @ (u - u_pred)]])
        if not np.all(np.isfinite(G)):
            return None
        if np.linalg.norm(r) < tol:
            return u, Fu
        A = np.vstack([Fu, t[None, :]])
        try:
            du = np.linalg.solve(A, -G)
        except np.linalg.LinAlgError:
            return None
        u = u + du
    mu = mu_base.copy()
    mu[param_index] = u[n]
    r, Fu = residual_jacobian(bvp, spec, u[:n], list(mu), param_index)
    return (u, Fu) if np.linalg.norm(r) < tol else None


def continue_branch(
    bvp: SeparatedBVP,
    spec: FlowSpec | None,
    seed: BranchPoint,
    ds: float = 1e-2,
    ds_min: float = 1e-6,
    ds_max: float | None = None,
    max_steps: int = 2000,
    mu_bounds: tuple = (-np.inf, np.inf),
    y_bounds: float = np.inf,
    direction: int = 1,
    param_index: int = 0,
    refine_folds: bool = True,
    tol: float = NEWTON_TOL,
    max_turn: float = 0.95,
) -> Branch:
    """Pseudo-arclength continuation in (y, mu[param_index]) from a converged seed.

    Folds are flagged where the mu-component of the tangent changes sign and,
    if ``refine_folds``, replaced by the point solving h = 0, det D_y h = 0.
    A step is shrunk when the tangent turns by more than arccos(max_turn) or
    when det D_y h and the mu-component of the tangent disagree about a sign
    change.
    """
    n = bvp.n
    ds_max = 10.0 * ds if ds_max is None else ds_max
    mu_base = np.array(seed.mu, dtype=float)
    u = np.concatenate([seed.y, [mu_base[param_index]]])
    r, Fu = residual_jacobian(bvp, spec, seed.y, list(mu_base), param_index)
    if np.linalg.norm(r) >= tol:
        raise ShootingError("continuation seed is not converged", seed.y, float(np.linalg.norm(r)), "seed")
    t = _null_tangent(Fu, None)
    if t[n] * direction < 0 or (t[n] == 0 and direction < 0):
        t = -t
    points = [_point(bvp, spec, u[:n], _with(mu_base, param_index, u[n]))]
    det = np.linalg.det(Fu[:, :n])
    h = ds
    reason = "max_steps"
    for _ in range(max_steps):
        accepted = None
        while h >= ds_min:
            u_pred = u + h * t
            res = _corrector(bvp, spec, u_pred, t, mu_base, param_index, tol)
            if res is not None and np.linalg.norm(res[0] - u) < 2.0 * h:
                t_try = _null_tangent(res[1], t)
                if t_try @ t < 0:
                    t_try = -t_try
                det_try = np.linalg.det(res[1][:, :n])
                # with a continuously oriented tangent, t_mu and det D_y h
                # change sign together; a mismatch or a sharp turn means the
                # corrector landed on a neighbouring branch
                consistent = (np.sign(det_try) * np.sign(det) < 0) == (np.sign(t_try[n]) * np.sign(t[n]) < 0)
                if (consistent and t_try @ t > max_turn) or h < 2.0 * ds_min:
                    accepted = res + (t_try, det_try)
                    break
            h *= 0.5
        if accepted is None:
            reason = "step floor"
            break
        u_new, Fu_new, t_new, det = accepted
        pt = _point(bvp, spec, u_new[:n], _with(mu_base, param_index, u_new[n]))
        if np.sign(t_new[n]) * np.sign(t[n]) < 0:
            fold = None
            if refine_folds:
                try:
                    fold = refine_fold(bvp, spec, 0.5 * (u + u_new), mu_base, param_index)
                except ShootingError:
                    fold = None
            if fold is None:
                pt.tag = "fold"
            else:
                points.append(fold)
        points.append(pt)
        u, t = u_new, t_new
        h = min(1.5 * h, ds_max)
        if not (mu_bounds[0] <= u[n] <= mu_bounds[1]):
            reason = "mu bounds"
            break
        if np.max(np.abs(u[:n])) > y_bounds:
            reason = "y bounds"
            break
    return Branch(points, reason)


def _with(mu_base, i, v):
    mu = np.array(mu_base, dtype=float)
    mu[i] = v
    return list(mu)


def refine_fold(bvp: SeparatedBVP, spec: FlowSpec | None, u0, mu_base, param_index: int = 0,
                tol: float = NEWTON_TOL, maxiter: int = 30, fd_step: float = 1e-7) -> BranchPoint:
    """Newton on (h(y, mu), det D_y h(y, mu)) = 0 with finite-difference Jacobian."""
    n = bvp.n
    u = np.asarray(u0, dtype=float).copy()
    mu_base = np.asarray(mu_base, dtype=float)

    def G(v):
        r, J = residual_jacobian(bvp, spec, v[:n], _with(mu_base, param_index, v[n]))
        return np.concatenate([r, [np.linalg.det(J)]])

    g = G(u)
    for _ in range(maxiter):
        A = np.empty((n + 1, n + 1))
        for j in range(n + 1):
            e = np.zeros(n + 1)
            e[j] = fd_step * max(1.0, abs(u[j]))
            A[:, j] = (G(u + e) - G(u - e)) / (2.0 * e[j])
        try:
            du = np.linalg.solve(A, -g)
        except np.linalg.LinAlgError as exc:
            raise ShootingError("fold refinement singular", u[:n], float(np.linalg.norm(g)), "singular") from exc
        u = u + du
        g = G(u)
        if np.linalg.norm(g[:n]) < tol and np.linalg.norm(du) < 1e-12 * (1.0 + np.linalg.norm(u)):
            break
    if not np.linalg.norm(g[:n]) < tol:
        raise ShootingError("fold refinement did not converge", u[:n], float(np.linalg.norm(g)), "fold")
    return _point(bvp, spec, u[:n], _with(mu_base, param_index, u[n]), tag="fold")


def trace_diagram(bvp: SeparatedBVP, spec: FlowSpec | None, mu_window, y_window, seeds_mu=None,
                  n_starts: int = 41, ds: float = 1e-2, param_index: int = 0, y_bounds: float = np.inf,
                  max_steps: int = 4000) -> BifurcationDiagram:
    """Sweep a few parameter values for seeds, then continue each seed both ways inside the window.

    ``y_window`` is a pair (used on every coordinate) or an n x 2 box; the
    multistart grid has ``n_starts`` points per coordinate.  Seeds lying on an already traced branch are skipped.
    """
    lo, hi = map(float, mu_window)
    if seeds_mu is None:
        seeds_mu = np.linspace(lo, hi, 5)
    box = np.asarray(y_window, dtype=float)
    if box.ndim == 1:
        box = np.tile(box, (bvp.n, 1))
    if box.shape != (bvp.n, 2):
        raise ValueError(f"y_window must be a pair or an {bvp.n}x2 box")
    axes = [np.linspace(a, b, n_starts) for a, b in box]
    starts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, bvp.n)
    coarse = sweep(bvp, spec, seeds_mu, starts, param_index)
    diagram = BifurcationDiagram(meta=_meta(bvp, spec, {"mode": "continuation", "param_index": param_index,
                                                          "mu_window": [lo, hi], "y_window": box.tolist()}))
    traced: list = []
    for seed in sorted(coarse.points(), key=lambda p: (p.mu[param_index], tuple(p.y))):
        if np.any(seed.y < box[:, 0]) or np.any(seed.y > box[:, 1]):
            continue
        if any(_on_branch(seed, b, param_index, 5 * ds, bvp, spec) for b in traced):
            continue
        halves = []
        for direction in (-1, 1):
            halves.append(continue_branch(bvp, spec, seed, ds=ds, mu_bounds=(lo, hi), y_bounds=y_bounds,
                                          direction=direction, param_index=param_index, max_steps=max_steps))
        pts = halves[0].points[::-1] + halves[1].points[1:]
        br = Branch(pts, f"{halves[0].reason}|{halves[1].reason}")
        traced.append(br)
    diagram.branches = traced
    return diagram


def _on_branch(p: BranchPoint, b: Branch, i: int, tol: float, bvp=None, spec=None) -> bool:
    """Whether ``p`` lies on the traced branch ``b``.

    Points farther than ``tol`` from the polyline are off the branch.  Nearer
    points are confirmed by re-solving the branch's own crossings at p's
    parameter value, since a fold pair can run closer than ``tol`` to another
    branch.
    """
    if not b.points:
        return False
    U = np.column_stack([b.y, b.mu[:, i]])
    v = np.concatenate([p.y, [p.mu[i]]])
    if len(U) == 1:
        d = float(np.linalg.norm(U[0] - v))
    else:
        a, c = U[:-1], U[1:]
        e = c - a
        s = np.clip(np.einsum("ij,ij->i", v - a, e) / np.maximum(np.einsum("ij,ij->i", e, e), 1e-300), 0, 1)
        d = float(np.min(np.linalg.norm(a + s[:, None] * e - v, axis=1)))
    if d >= tol:
        return False
    if bvp is None or d < 1e-9:
        return True
    for c in _crossings(b, float(p.mu[i]), i):
        try:
            q = shoot(bvp, spec, list(p.mu), c)
        except ShootingError:
            continue
        if np.linalg.norm(q.y - p.y) < 1e-6:
            return True
    return False


# ---------------------------------------------------------------------------
# break magnitude


def _crossings(branch: Branch, mu_val: float, i: int) -> list:
    """y values where the branch polyline crosses mu = mu_val."""
    mu = branch.mu[:, i]
    Y = branch.y
    out = []
    for k in range(len(mu) - 1):
        a, b = mu[k] - mu_val, mu[k + 1] - mu_val
        if a == 0.0:
            out.append(Y[k])
        elif a * b < 0:
            s = a / (a - b)
            out.append(Y[k] + s * (Y[k + 1] - Y[k]))
    if len(mu) and mu[-1] == mu_val:
        out.append(Y[-1])
    return out


def _deflated_shoot(bvp, spec, mu, y0, root, maxiter=60, tol=NEWTON_TOL, shift=1.0):
    """Newton on m(y) h(y) with m = 1/|y - root|^2 + shift.

    The deflation factor removes ``root`` (a double root at a fold) from the
    solution set, so starts near the fold cannot collapse onto it.  Returns
    None when no other root is reached.
    """
    y = np.array(y0, dtype=float, copy=True)
    root = np.asarray(root, dtype=float)
    for _ in range(maxiter):
        try:
            r, J = residual_jacobian(bvp, spec, y[None, :], mu)
        except FlowError:
            return None
        r, J = r[0], J[0]
        e = y - root
        d2 = float(e @ e)
        if not np.isfinite(r).all() or d2 == 0.0:
            return None
        if np.linalg.norm(r) < tol:
            return y if np.sqrt(d2) > 1e-6 else None
        m = 1.0 / d2 + shift
        grad_m = -2.0 * e / d2**2
        JG = m * J + np.outer(r, grad_m)
        try:
            step = -np.linalg.solve(JG, m * r)
        except np.linalg.LinAlgError:
            return None
        y = y + step
    return None


def pitchfork_break(diagram: BifurcationDiagram, window=None, param_index: int = 0,
                    bvp: SeparatedBVP | None = None, spec: FlowSpec | None = None, metric=None) -> float:
    """Smallest y-distance, at a fold's parameter value, from the fold point to any other solution.

    Other solutions are crossings of the line mu = mu_fold by the other
    branches and by the far parts of the fold's own branch.  With ``bvp``
    given, every crossing is re-solved at exactly mu_fold by Newton deflated
    at the fold point, so the result inherits neither the interpolation error
    of the polyline nor a collapse onto the fold's double root.  Returns 0 for
    a perfect pitchfork, where the fold lies on the continuing branch.
    ``metric`` (a matrix G) measures gaps as |G (y - y_fold)|.
    """
    G = None if metric is None else np.asarray(metric, dtype=float)
    best = np.inf
    found = False
    for b in diagram.branches:
        for k, fp in enumerate(b.points):
            if fp.tag != "fold":
                continue
            m = float(fp.mu[param_index])
            if window is not None and not (window[0] <= m <= window[1]):
                continue
            found = True
            for other in diagram.branches:
                if other is b:
                    # the fold's own arms only touch mu = m at the fold itself
                    cands = _crossings(Branch(b.points[:k]), m, param_index)
                    cands += _crossings(Branch(b.points[k + 1:]), m, param_index)
                else:
                    cands = _crossings(other, m, param_index)
                for c in cands:
                    if bvp is not None:
                        d = _deflated_shoot(bvp, _spec_for(bvp, spec), list(fp.mu), c, fp.y)
                        if d is None:
                            # at a perfect pitchfork the deflated problem keeps
                            # a root at the fold itself and Newton stalls there
                            try:
                                d = shoot(bvp, spec, list(fp.mu), c).y
                            except ShootingError:
                                continue
                        c = d
                    gap = np.asarray(c) - fp.y
                    if G is not None:
                        gap = G @ gap
                    best = min(best, float(np.linalg.norm(gap)))
    if not found:
        raise ValueError("window contains no fold")
    return best
