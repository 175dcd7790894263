"""Corank tests, umbilic location and level bifurcation sets.

The objects of study are the blocks of the discrete flow Jacobian: for a
Dirichlet-type problem the relevant matrix is ``D_y phi^X`` (derivative of the
end position with respect to the initial momentum).  A fold of the problem is a
zero of its determinant; a D-series point (n = 2) is where the whole block
vanishes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from skimage import measure

from . import jets as jt
from .integrate import FlowSpec, propagate
from .systems import SeparatedBVP

__all__ = [
    "SingularPoint",
    "LevelBifurcationSet",
    "ShootingChart",
    "CuspRidges",
    "corank",
    "flow_blocks",
    "umbilic_seed_scan",
    "locate_umbilic",
    "level_bifurcation_set",
    "cusp_ridges",
    "cusp_ridges_on_chart",
    "locate_corank2",
    "seed_scan_on_chart",
    "det_hessian",
    "cone_axis",
    "classify_A",
]


def corank(M, tol: float = 1e-6, scale: float | None = None):
    """Number of singular values <= tol * scale (scale defaults to the largest one).

    A zero matrix (with no explicit scale) uses scale 1 and so has full corank.
    Works on stacks of matrices.
    """
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie in (0, 1)")
    M = np.asarray(M, dtype=float)
    s = np.linalg.svd(M, compute_uv=False)
    if scale is None:
        ref = s[..., 0]
        ref = np.where(ref > 0.0, ref, 1.0)
    else:
        ref = np.asarray(scale, dtype=float)
    out = np.sum(s <= tol * np.asarray(ref)[..., None], axis=-1)
    return int(out) if out.ndim == 0 else out


@dataclass
class SingularPoint:
    u: np.ndarray  # chart coordinates (e.g. x2, y1, y2)
    jac: np.ndarray  # D_y phi^X
    corank: int
    class_hint: str = "unknown"
    residual_norm: float = np.nan
    converged: bool = True
    scale: float = 1.0
    mu: np.ndarray = field(default_factory=lambda: np.zeros(0))
    history: list = field(default_factory=list)

    @property
    def y(self) -> np.ndarray:
        n = self.jac.shape[-1]
        return np.asarray(self.u)[-n:]


# ---------------------------------------------------------------------------
# charts on the start manifold


@dataclass(frozen=True)
class ShootingChart:
    """Coordinates ``u = (free x*, free parameters, y)`` of a Dirichlet-type family.

    Start points are ``q = x*`` (with the free entries taken from ``u``) and
    ``p = y``; free parameters replace entries of the parameter vector.  The
    image of ``u`` in parameter space is ``(free x*, free parameters, X)``.
    """

    bvp: SeparatedBVP
    spec: FlowSpec | None
    free_x: tuple = ()
    free_params: tuple = ()

    @property
    def n(self) -> int:
        return self.bvp.n

    @property
    def dim(self) -> int:
        return len(self.free_x) + len(self.free_params) + self.n

    def split(self, u):
        """Entries (q, p, mu) for chart coordinates ``u`` (last axis)."""
        u = list(u) if not isinstance(u, np.ndarray) else [u[..., i] for i in range(u.shape[-1])]
        k = len(self.free_x)
        m = len(self.free_params)
        xs = list(self.bvp.x_star.astype(float))
        for j, i in enumerate(self.free_x):
            xs[i] = u[j]
        ref = u[0]
        q = [x if i in self.free_x else x + 0.0 * jt.value_of(ref) for i, x in enumerate(xs)]
        mu = list(self.bvp.system.mu(None))
        for j, i in enumerate(self.free_params):
            mu[i] = u[k + j]
        p = u[k + m:]
        return q, p, mu

    def end(self, q, p, mu):
        spec = self.spec
        if spec is not None and spec.tau != self.bvp.tau:
            spec = FlowSpec(spec.method, spec.steps, self.bvp.tau)
        return propagate(self.bvp.system, q, p, mu, spec)

    def blocks(self, u):
        """End position X and D_y phi^X at chart points ``u`` (batched)."""
        u = np.asarray(u, dtype=float)
        n = self.n
        q, p, mu = self.split(u)
        shape = u.shape[:-1]
        pj = jt.lift(np.stack([np.broadcast_to(v, shape) for v in p], axis=-1))
        Q, _ = self.end(q, pj, mu)
        return jt.values(Q), jt.tangents(Q, n)

    def full_jacobian_norm(self, u) -> np.ndarray:
        """Spectral norm of the full 2n x 2n flow Jacobian (scale for corank tests)."""
        u = np.asarray(u, dtype=float)
        q, p, mu = self.split(u)
        shape = u.shape[:-1]
        z = np.stack([np.broadcast_to(jt.value_of(v), shape) for v in q + p], axis=-1)
        ent = jt.lift(z)
        n = self.n
        Q, P = self.end(ent[:n], ent[n:], mu)
        M = jt.tangents(Q + P, 2 * n)
        return np.linalg.norm(M, ord=2, axis=(-2, -1))

    def image(self, u, X) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        k = len(self.free_x) + len(self.free_params)
        return np.concatenate([u[..., :k], X], axis=-1)


def _chart(bvp, spec, free_x=None, free_params=()):
    if free_x is None:
        free_x = tuple(range(1, bvp.n)) if bvp.n > 1 and not free_params else ()
    if not bvp.is_dirichlet:
        raise ValueError("level-set charts need Dirichlet-type boundary data")
    return ShootingChart(bvp, spec, tuple(free_x), tuple(free_params))


def flow_blocks(bvp: SeparatedBVP, spec: FlowSpec | None, u, free_x=None, free_params=()):
    """(X, D_y phi^X) on chart points ``u``; see :class:`ShootingChart`."""
    return _chart(bvp, spec, free_x, free_params).blocks(u)


# ---------------------------------------------------------------------------
# umbilic location


def umbilic_seed_scan(bvp, spec, box, shape=(21, 21, 21)):
    """Grid point minimising ||D_y phi^X||_F over ``box`` (rows lo, hi per chart coordinate)."""
    return seed_scan_on_chart(_chart(bvp, spec), box, shape)


def seed_scan_on_chart(chart, box, shape=(21, 21, 21)):
    """Grid point where the chart's D is closest to corank 2.

    For 2 x 2 matrices this is the Frobenius norm; larger matrices use the
    second smallest singular value.
    """
    axes = [np.linspace(lo, hi, k) for (lo, hi), k in zip(box, shape)]
    U = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    with np.errstate(all="ignore"):
        _, D = chart.blocks(U)
    if D.shape[-1] == 2:
        with np.errstate(all="ignore"):
            F = np.sqrt(np.sum(D * D, axis=(-2, -1)))
    else:
        bad = ~np.isfinite(D).all(axis=(-2, -1))
        F = np.full(D.shape[:-2], np.inf)
        F[~bad] = np.linalg.svd(D[~bad], compute_uv=False)[..., -2]
    F[~np.isfinite(F)] = np.inf
    k = np.unravel_index(int(np.argmin(F)), F.shape)
    return U[k], float(F[k])


def _corank2_residual(D: np.ndarray, Uf: np.ndarray, Vf: np.ndarray) -> np.ndarray:
    # Schur complement of the leading (n-2) block in fixed frames; vanishes iff rank D <= n - 2
    M = Uf.T @ D @ Vf
    k = M.shape[-1] - 2
    if k == 0:
        return M.reshape(M.shape[:-2] + (-1,))
    A, B, C, E = M[..., :k, :k], M[..., :k, k:], M[..., k:, :k], M[..., k:, k:]
    S = E - C @ np.linalg.solve(A, B)
    return S.reshape(S.shape[:-2] + (-1,))


def locate_umbilic(bvp: SeparatedBVP, spec: FlowSpec | None, seed, tol: float = 1e-8, fd_step: float = 1e-5,
                   maxiter: int = 100, stall_window: int = 5, stall_ratio: float = 1e-3,
                   corank_tol: float = 1e-6) -> SingularPoint:
    """Gauss-Newton on all entries of D_y phi^X over (x2, y1, y2) for n = 2.

    The 4 x 3 residual Jacobian is formed by central differences of the
    jet-computed entries.  Stops on success (Frobenius norm < tol) or on
    stagnation; the result records the best point and its residual floor.
    """
    if bvp.n != 2:
        raise ValueError("locate_umbilic needs a problem with n = 2")
    chart = _chart(bvp, spec)
    pt = locate_corank2(chart, seed, tol, fd_step, maxiter, stall_window, stall_ratio, corank_tol)
    pt.mu = np.asarray(chart.split(pt.u)[2], dtype=float)
    return pt


def locate_corank2(chart, seed, tol: float = 1e-8, fd_step: float = 1e-5, maxiter: int = 100,
                   stall_window: int = 5, stall_ratio: float = 1e-3, corank_tol: float = 1e-6) -> SingularPoint:
    """Gauss-Newton for a corank-2 point of the chart's matrix D(u).

    For 2 x 2 matrices the residual is D itself; for larger ones it is the
    2 x 2 Schur complement of the leading block in singular frames fixed at
    the seed.  The corank scale is the spectral norm of the full flow
    Jacobian at the result.
    """
    u = np.asarray(seed, dtype=float).copy()
    d = len(u)
    D0 = chart.blocks(u)[1]
    Uf, _, Vt = np.linalg.svd(D0)
    if D0.shape[-1] == 2:
        Uf, Vf = np.eye(2), np.eye(2)
    else:
        Vf = Vt.T

    def R(v):
        return _corank2_residual(chart.blocks(np.asarray(v, dtype=float))[1], Uf, Vf)

    r = R(u)
    norm = float(np.linalg.norm(r))
    hist = [norm]
    converged = norm < tol
    for _ in range(maxiter):
        if converged:
            break
        E = np.eye(d) * fd_step
        Dp = chart.blocks(np.concatenate([u + E, u - E]))[1]
        Rr = _corank2_residual(Dp, Uf, Vf)
        J = ((Rr[:d] - Rr[d:]) / (2.0 * fd_step)).T
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        lam = 1.0
        accepted = False
        for _h in range(12):
            trial = u + lam * step
            rt = R(trial)
            nt = float(np.linalg.norm(rt))
            if np.isfinite(nt) and nt < norm:
                u, r, norm = trial, rt, nt
                accepted = True
                break
            lam *= 0.5
        hist.append(norm)
        if norm < tol:
            converged = True
            break
        if not accepted:
            break
        if len(hist) > stall_window and (hist[-1 - stall_window] - hist[-1]) < stall_ratio * hist[-1 - stall_window]:
            break
    D = chart.blocks(u)[1]
    scale = float(chart.full_jacobian_norm(u))
    ck = corank(D, corank_tol, scale=scale)
    hint = "D4_candidate" if ck == 2 else ("A2" if ck == 1 else "unknown")
    return SingularPoint(u, D, ck, hint, norm, bool(converged), scale, np.zeros(0), hist)


# ---------------------------------------------------------------------------
# level sets


@dataclass
class LevelBifurcationSet:
    """Zero set of det D_y phi^X sampled on a box, mapped into parameter space.

    ``chart_vertices`` are in chart coordinates, ``vertices`` their images;
    ``cells`` are segments (2D boxes) or triangles (3D boxes).
    """

    chart_vertices: np.ndarray
    vertices: np.ndarray
    cells: np.ndarray
    det_at_vertices: np.ndarray
    grid: dict
    jac_at_vertices: np.ndarray | None = None
    empty_reason: str = ""

    @property
    def dim(self) -> int:
        return self.chart_vertices.shape[-1]

    def __len__(self) -> int:
        return len(self.chart_vertices)


def _grid(box, shape):
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2:
        raise ValueError("box must be a list of (lo, hi) pairs")
    if np.isscalar(shape):
        shape = (int(shape),) * len(box)
    axes = [np.linspace(lo, hi, k) for (lo, hi), k in zip(box, shape)]
    return axes, tuple(shape)


def _det_field(chart: ShootingChart, axes, chunk: int = 200_000):
    U = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    flat = U.reshape(-1, U.shape[-1])
    out = np.empty(flat.shape[0])
    for s in range(0, flat.shape[0], chunk):
        with np.errstate(all="ignore"):
            D = chart.blocks(flat[s:s + chunk])[1]
        out[s:s + chunk] = np.linalg.det(D)
    return out.reshape(U.shape[:-1])


def _to_chart(idx_pts, axes):
    # fractional grid indices -> chart coordinates
    cols = []
    for d, ax in enumerate(axes):
        i = idx_pts[:, d]
        i0 = np.clip(np.floor(i).astype(int), 0, len(ax) - 2)
        t = i - i0
        cols.append(ax[i0] + t * (ax[i0 + 1] - ax[i0]))
    return np.stack(cols, axis=-1)


def _secant_refine(chart, idx_pts, field, axes):
    """One secant step per vertex along the grid edge it lies on."""
    P = np.asarray(idx_pts, dtype=float)
    frac = np.abs(P - np.round(P))
    axis = np.argmax(frac, axis=1)
    lo = np.floor(P).astype(int)
    hi = lo.copy()
    rows = np.arange(len(P))
    hi[rows, axis] = np.minimum(lo[rows, axis] + 1, np.array([len(axes[a]) - 1 for a in axis]))
    for d in range(P.shape[1]):
        on = axis != d
        lo[on, d] = np.round(P[on, d]).astype(int)
        hi[on, d] = lo[on, d]
    f0 = field[tuple(lo.T)]
    f1 = field[tuple(hi.T)]
    t0 = np.where(f0 != f1, f0 / np.where(f0 != f1, f0 - f1, 1.0), 0.5)
    t0 = np.clip(t0, 0.0, 1.0)

    def at(t):
        idx = lo + (hi - lo) * t[:, None]
        return idx

    U0 = _to_chart(at(t0), axes)
    with np.errstate(all="ignore"):
        d0 = np.linalg.det(chart.blocks(U0)[1])
    # secant between the interpolated point and the edge end with opposite sign
    use_lo = np.sign(d0) == np.sign(f1)
    ta = np.where(use_lo, 0.0, 1.0)
    fa = np.where(use_lo, f0, f1)
    denom = d0 - fa
    t1 = np.where(np.abs(denom) > 0, t0 - d0 * (t0 - ta) / np.where(np.abs(denom) > 0, denom, 1.0), t0)
    t1 = np.clip(t1, 0.0, 1.0)
    U1 = _to_chart(at(t1), axes)
    X, D = chart.blocks(U1)
    d1 = np.linalg.det(D)
    better = np.abs(d1) <= np.abs(d0)
    if not better.all():
        X0, D0 = chart.blocks(U0)
        U1 = np.where(better[:, None], U1, U0)
        X = np.where(better[:, None], X, X0)
        D = np.where(better[:, None, None], D, D0)
        d1 = np.where(better, d1, d0)
    return U1, X, D, d1


def level_bifurcation_set(bvp: SeparatedBVP, spec: FlowSpec | None, box, shape=41, free_x=None,
                          free_params=(), field: np.ndarray | None = None) -> LevelBifurcationSet:
    """Extract {det D_y phi^X = 0} on a 2D or 3D box and map it to parameter space.

    Box coordinates follow :class:`ShootingChart` (free x*, free parameters, y).
    """
    chart = _chart(bvp, spec, free_x, free_params)
    axes, shape = _grid(box, shape)
    if len(axes) not in (2, 3) or len(axes) != chart.dim:
        raise ValueError(f"box dimension must be 2 or 3 and match the chart ({chart.dim})")
    F = _det_field(chart, axes) if field is None else np.asarray(field, dtype=float)
    meta = {"box": np.asarray(box, dtype=float).tolist(), "shape": list(shape)}
    finite = np.isfinite(F)
    if not finite.all():
        F = np.where(finite, F, np.nanmax(np.abs(F[finite])) if finite.any() else 1.0)
    d = len(axes)
    if F.min() > 0 or F.max() < 0:
        return LevelBifurcationSet(np.zeros((0, d)), np.zeros((0, d)), np.zeros((0, d), dtype=int),
                                   np.zeros(0), meta, np.zeros((0, chart.n, chart.n)), "no sign change on grid")
    if d == 2:
        pts, cells = [], []
        for c in measure.find_contours(F, 0.0):
            base = sum(len(p) for p in pts)
            pts.append(c)
            cells.extend([(base + i, base + i + 1) for i in range(len(c) - 1)])
        idx = np.concatenate(pts)
        cells = np.asarray(cells, dtype=int).reshape(-1, 2)
    else:
        idx, cells, _, _ = measure.marching_cubes(F, 0.0, allow_degenerate=False)
        cells = np.asarray(cells, dtype=int)
    U, X, D, dets = _secant_refine(chart, idx, F, axes)
    return LevelBifurcationSet(U, chart.image(U, X), cells, dets, meta, D)


# ---------------------------------------------------------------------------
# cusp ridges


@dataclass
class CuspRidges:
    """Cuspidal edges of the level bifurcation set near a D-series point.

    A point of the fold surface {det D_y phi^X = 0} is a cusp point when the
    kernel direction k of D_y phi^X is tangent to the surface, i.e. when the
    derivative of det along (0, k) vanishes.  Cusps are located on slices
    transverse to ``axis`` and linked across slices into ridges.
    """

    center: np.ndarray
    axis: np.ndarray
    frame: np.ndarray
    offsets: np.ndarray
    cusps: list  # per slice: (k, d) chart points
    ridges: list
    degree: dict = field(default_factory=dict)


def _kernel(D: np.ndarray) -> np.ndarray:
    # right singular vector of the smallest singular value
    return np.linalg.svd(D)[2][..., -1, :]


def _det(chart, U):
    with np.errstate(all="ignore"):
        return np.linalg.det(chart.blocks(U)[1])


def det_hessian(chart: ShootingChart, u0, step: float = 1e-3) -> np.ndarray:
    """Central-difference Hessian of det D_y phi^X at ``u0``."""
    u0 = np.asarray(u0, dtype=float)
    d = len(u0)
    E = np.eye(d) * step
    H = np.empty((d, d))
    f0 = _det(chart, u0[None])[0]
    for i in range(d):
        for j in range(i, d):
            if i == j:
                v = _det(chart, np.stack([u0 + E[i], u0 - E[i]]))
                H[i, i] = (v[0] - 2.0 * f0 + v[1]) / step**2
            else:
                v = _det(chart, np.stack([u0 + E[i] + E[j], u0 + E[i] - E[j], u0 - E[i] + E[j], u0 - E[i] - E[j]]))
                H[i, j] = H[j, i] = (v[0] - v[1] - v[2] + v[3]) / (4.0 * step**2)
    return H


def cone_axis(H: np.ndarray) -> np.ndarray:
    """Axis of the quadratic cone {x^T H x = 0}: eigenvector of the odd-signed eigenvalue."""
    w, V = np.linalg.eigh(H)
    signs = np.sign(w)
    if abs(signs.sum()) != 1:
        raise ValueError("det Hessian is not of cone type (signature must be (2, 1))")
    odd = signs != np.sign(signs.sum())
    a = V[:, np.where(odd)[0][0]]
    return a if a[np.argmax(np.abs(a))] > 0 else -a


def _cusp_function(chart, U, eps=1e-6):
    """Directional derivative of det along (0, k), with k oriented continuously along U."""
    _, D = chart.blocks(U)
    k = _kernel(D)
    for i in range(1, len(k)):
        if k[i] @ k[i - 1] < 0:
            k[i] = -k[i]
    n = k.shape[-1]
    dirs = np.zeros(U.shape)
    dirs[:, -n:] = k
    v = _det(chart, np.concatenate([U + eps * dirs, U - eps * dirs]))
    return (v[: len(U)] - v[len(U):]) / (2.0 * eps), k


def _loop_cusps(chart, U: np.ndarray, closed: bool) -> list:
    c, k = _cusp_function(chart, U)
    m = len(c)
    flip = -1.0 if closed and m > 2 and k[-1] @ k[0] < 0 else 1.0
    out = []
    for i in range(m - 1 if not closed else m):
        j = i + 1
        # going once around, the kernel orientation may come back reversed
        cj = c[j] if j < m else flip * c[0]
        ci = c[i]
        if ci * cj < 0:
            s = ci / (ci - cj)
            out.append(U[i] + s * (U[j % m] - U[i]))
        elif ci == 0.0:
            # exact zeros happen on symmetry planes; count them when the sign flips across
            prev = c[i - 1] if i > 0 else (flip * c[-1] if closed else 0.0)
            if prev * cj < 0:
                out.append(U[i])
    return out


def cusp_ridges(bvp, spec, center, half_width: float = 0.5, shape: int = 81, axis=None,
                min_loop: int = 12, link_factor: float = 3.0) -> CuspRidges:
    """Cusp ridges around a corank-2 point of an n = 2 problem.

    Slices are planes orthogonal to ``axis`` (default: the axis of the det
    cone at ``center``), sampled on a ``shape x shape`` grid of the given
    half width.  Each slice contour gets one secant refinement per vertex.
    """
    return cusp_ridges_on_chart(_chart(bvp, spec), center, half_width, shape, axis, min_loop, link_factor)


def cusp_ridges_on_chart(chart, center, half_width: float = 0.5, shape: int = 81, axis=None,
                         min_loop: int = 12, link_factor: float = 3.0,
                         axial_half_width: float | None = None) -> CuspRidges:
    """As :func:`cusp_ridges` for any three-dimensional chart whose kernel lives in its last coordinates.

    ``axial_half_width`` (default ``half_width``) bounds the slice offsets
    along the axis; flat cones need it much smaller than the in-plane width.
    """
    if chart.dim != 3:
        raise ValueError("cusp ridges need a three-dimensional chart")
    c0 = np.asarray(center, dtype=float)
    if axis is None:
        axis = cone_axis(det_hessian(chart, c0))
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    # orthonormal frame (a, e1, e2)
    Q, _ = np.linalg.qr(np.column_stack([a, np.eye(3)]))
    frame = Q[:, :3] * np.sign(Q[:, :1].T @ a)
    frame[:, 0] = a
    ax_w = half_width if axial_half_width is None else float(axial_half_width)
    offs = np.linspace(-ax_w, ax_w, shape)
    g = np.linspace(-half_width, half_width, shape)
    A1, A2 = np.meshgrid(g, g, indexing="ij")
    cusps = []
    spacing = g[1] - g[0]
    for s in offs:
        U = c0 + s * a + A1[..., None] * frame[:, 1] + A2[..., None] * frame[:, 2]
        Fs = _det(chart, U.reshape(-1, 3)).reshape(A1.shape)
        pts: list = []
        if np.isfinite(Fs).all() and Fs.min() < 0 < Fs.max():
            for cont in measure.find_contours(Fs, 0.0):
                if len(cont) < min_loop:
                    continue
                closed = bool(np.allclose(cont[0], cont[-1]))
                Uc = _refine_on_plane(chart, cont, Fs, c0 + s * a, frame, g)
                if closed:
                    Uc = Uc[:-1]
                pts.extend(_loop_cusps(chart, Uc, closed))
        cusps.append(np.asarray(pts).reshape(-1, 3))
    bound = link_factor * max(spacing, offs[1] - offs[0])
    ridges = _link_ridges(cusps, bound)
    degree = {"below": 0, "above": 0}
    for r in ridges:
        if len(r) < 3:
            continue
        ends = [r[0], r[-1]]
        near = min(ends, key=lambda e: np.linalg.norm(e - c0))
        if np.linalg.norm(near - c0) < 0.25 * half_width:
            side = "below" if (near - c0) @ a < 0 else "above"
            degree[side] += 1
    return CuspRidges(c0, a, frame, offs, cusps, ridges, degree)


def _refine_on_plane(chart, cont, Fs, origin, frame, g):
    # one secant step along the grid edge of each contour vertex, inside the slice plane
    h = g[1] - g[0]
    frac = np.abs(cont - np.round(cont))
    ax = np.argmax(frac, axis=1)
    lo = np.floor(cont).astype(int)
    lo = np.clip(lo, 0, len(g) - 2)
    rows = np.arange(len(cont))
    other = 1 - ax
    base = np.empty_like(lo)
    base[rows, ax] = lo[rows, ax]
    base[rows, other] = np.round(cont[rows, other]).astype(int)
    top = base.copy()
    top[rows, ax] += 1
    f0 = Fs[base[:, 0], base[:, 1]]
    f1 = Fs[top[:, 0], top[:, 1]]

    def to_u(t):
        idx = base + (top - base) * t[:, None]
        return origin + (g[0] + h * idx[:, :1]) * frame[:, 1] + (g[0] + h * idx[:, 1:]) * frame[:, 2]

    t0 = np.clip(np.where(f0 != f1, f0 / np.where(f0 != f1, f0 - f1, 1.0), 0.5), 0, 1)
    d0 = _det(chart, to_u(t0))
    use_lo = np.sign(d0) == np.sign(f1)
    ta = np.where(use_lo, 0.0, 1.0)
    fa = np.where(use_lo, f0, f1)
    den = d0 - fa
    t1 = np.clip(np.where(den != 0, t0 - d0 * (t0 - ta) / np.where(den != 0, den, 1.0), t0), 0, 1)
    return to_u(t1)


def _link_ridges(cusps, bound):
    ridges: list = []
    open_: list = []
    for C in cusps:
        new_open = []
        used = set()
        pairs = sorted((float(np.linalg.norm(C[j] - ridges[r][-1])), r, j) for r in open_ for j in range(len(C)))
        taken = set()
        for d, r, j in pairs:
            if d > bound or r in taken or j in used:
                continue
            ridges[r].append(C[j])
            taken.add(r)
            used.add(j)
            new_open.append(r)
        for j in range(len(C)):
            if j not in used:
                ridges.append([C[j]])
                new_open.append(len(ridges) - 1)
        open_ = new_open
    return [np.asarray(r) for r in ridges]


# ---------------------------------------------------------------------------
# classification


def classify_A(point: SingularPoint, bvp: SeparatedBVP | None = None, spec: FlowSpec | None = None,
               fun: Callable | None = None, step: float = 1e-3, rel: float = 1e-4) -> tuple[str, dict]:
    """A2 / A3 / higher from directional differences of <w, residual> along the kernel v.

    ``fun`` maps y to the residual; by default the shooting residual of ``bvp``
    at ``point.mu`` is used.
    """
    if point.corank != 1:
        raise ValueError("classify_A needs a corank-1 point")
    if fun is None:
        if bvp is None:
            raise ValueError("need either bvp or fun")
        from .bvp import residual

        def fun(y):
            return residual(bvp, spec, y, list(point.mu))

    y = np.asarray(point.y, dtype=float)
    U, s, Vt = np.linalg.svd(point.jac)
    v, w = Vt[-1], U[:, -1]
    scale = max(float(point.scale), 1.0)

    def g(t):
        return float(w @ np.asarray(fun(y + t * v)))

    d = step
    c2 = (g(d) - 2.0 * g(0.0) + g(-d)) / d**2
    c3 = (g(2 * d) - 2.0 * g(d) + 2.0 * g(-d) - g(-2 * d)) / (2.0 * d**3)
    info = {"c2": c2, "c3": c3, "scale": scale}
    if abs(c2) > rel * scale:
        return "A2", info
    if abs(c3) > rel * scale:
        return "A3", info
    return "higher", info
