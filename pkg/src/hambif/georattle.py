"""RATTLE and jet-RATTLE for geodesics on hypersurfaces f(q) = 0, and conjugate loci.

Geodesics are motions of H = |p|^2 / 2 constrained to the surface.  One step
of size h solves a scalar equation for the multiplier lambda, kicks, drifts
and projects the momentum onto the new tangent space.  The jet version also
carries V, the derivative of the composed step map with respect to the
initial (q, p), updated by the exact step derivative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jets as jt
from .systems import Hypersurface

__all__ = [
    "RattleError",
    "ConstrainedState",
    "JetRattleState",
    "solve_lambda",
    "rattle_step",
    "rattle_entries",
    "jet_rattle_step",
    "step_derivative",
    "rattle_flow",
    "jet_rattle_flow",
    "tangent_basis",
    "project_to_surface",
    "ConjugateLocus",
    "conjugate_locus",
    "default_max_arc",
    "ExpMapChart",
    "sphere_rays",
    "corank2_seeds",
]


class RattleError(RuntimeError):
    """The multiplier equation of a RATTLE step could not be solved."""

    def __init__(self, message: str, q=None, p=None, h=None):
        super().__init__(message)
        self.q, self.p, self.h = q, p, h


@dataclass
class ConstrainedState:
    q: np.ndarray
    p: np.ndarray
    lam: np.ndarray | float = 0.0  # multiplier of the last step (Newton warm start)


@dataclass
class JetRattleState:
    state: ConstrainedState
    V: np.ndarray  # (..., 2n, m) derivative of the step composition

    @classmethod
    def start(cls, q, p, columns=None) -> "JetRattleState":
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        n = q.shape[-1]
        I = np.eye(2 * n) if columns is None else np.asarray(columns, dtype=float)
        V = np.broadcast_to(I, q.shape[:-1] + I.shape).copy()
        return cls(ConstrainedState(q, p, np.zeros(q.shape[:-1])), V)


def _entries(x: np.ndarray) -> list:
    return [x[..., i] for i in range(x.shape[-1])]


def _f(surface: Hypersurface, q: np.ndarray) -> np.ndarray:
    return np.asarray(surface.f(_entries(q)), dtype=float)


def _grad(surface: Hypersurface, q: np.ndarray) -> np.ndarray:
    return surface.gradient(q)


def _hess(surface: Hypersurface, q: np.ndarray) -> np.ndarray:
    return np.asarray(surface.hess_f(q), dtype=float)


# ---------------------------------------------------------------------------
# the multiplier


def solve_lambda(surface: Hypersurface, q, p, h: float, lam0=0.0, tol: float = 1e-13,
                 maxiter: int = 30) -> np.ndarray:
    """Solve 0 = f(q + h (p - h/2 grad f(q) lambda)) for lambda (batched over leading axes).

    Scalar Newton from ``lam0``; entries that do not reach |f| < tol fall back
    to bisection on [-lmax, lmax] with lmax doubling from 1 up to 2**10.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    g = _grad(surface, q)
    if np.any(np.linalg.norm(g, axis=-1) == 0.0):
        raise RattleError("zero constraint gradient", q, p, h)
    base = q + h * p
    kick = -0.5 * h * h * g

    def F(lam):
        return _f(surface, base + kick * lam[..., None])

    lam = np.broadcast_to(np.asarray(lam0, dtype=float), q.shape[:-1]).copy()
    val = F(lam)
    for _ in range(maxiter):
        done = np.abs(val) < tol
        if done.all():
            return lam
        dF = np.sum(_grad(surface, base + kick * lam[..., None]) * kick, axis=-1)
        with np.errstate(all="ignore"):
            lam = np.where(done, lam, lam - val / dF)
        val = F(lam)
    bad = ~(np.abs(val) < tol)
    if bad.any():
        lam = np.where(bad, _bisect(F, q.shape[:-1], bad, tol, q, p, h), lam)
    return lam


def _bisect(F, shape, bad, tol, q, p, h):
    lo = np.full(shape, np.nan)
    hi = np.full(shape, np.nan)
    lmax = 1.0
    need = bad.copy()
    while need.any():
        a = np.full(shape, -lmax)
        b = np.full(shape, lmax)
        fa, fb = F(a), F(b)
        ok = need & (np.sign(fa) * np.sign(fb) <= 0)
        lo = np.where(ok, a, lo)
        hi = np.where(ok, b, hi)
        need &= ~ok
        if not need.any():
            break
        lmax *= 2.0
        if lmax > 2.0**10:
            raise RattleError("no sign change of the multiplier equation within |lambda| <= 2**10", q, p, h)
    flo = F(np.where(bad, lo, 0.0))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = F(np.where(bad, mid, 0.0))
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(bad & left, mid, lo)
        flo = np.where(bad & left, fm, flo)
        hi = np.where(bad & ~left, mid, hi)
        if np.all(~bad | (np.abs(fm) < tol) | (hi - lo < 1e-16 * (1.0 + np.abs(lo)))):
            return np.where(bad, mid, 0.0)
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# plain and jet-seeded steps


def rattle_entries(surface: Hypersurface, q: list, p: list, h: float, lam0=0.0, project: bool = True):
    """One RATTLE step on entry lists (floats, arrays or jets); returns (q', p', lambda).

    With jets, the multiplier's partials come from the implicit function
    theorem applied to its defining equation.
    """
    n = len(q)
    qv = jt.values(q)
    pv = np.broadcast_to(jt.values(p), qv.shape)
    lam_v = solve_lambda(surface, qv, pv, h, lam0)
    g = surface.grad_f(q)
    trial = [q[i] + h * (p[i] - 0.5 * h * g[i] * lam_v) for i in range(n)]
    jets = [e for e in q + p if isinstance(e, jt.Jet)]
    if jets:
        F = surface.f(trial)
        g1 = _grad(surface, jt.values(trial))
        dF = np.sum(g1 * (-0.5 * h * h) * jt.values(g), axis=-1)
        m = jets[0].nseeds
        lam = jt.Jet(lam_v, -jt.partials_of(F, m, np.shape(lam_v)) / dF[..., None])
    else:
        lam = lam_v
    p_half = [p[i] - 0.5 * h * g[i] * lam for i in range(n)]
    q_new = [q[i] + h * p_half[i] for i in range(n)]
    if not project:
        return q_new, p_half, lam_v
    g_new = surface.grad_f(q_new)
    norm = jt.sqrt(sum(gi * gi for gi in g_new))
    nvec = [gi / norm for gi in g_new]
    dot = sum(nvec[i] * p_half[i] for i in range(n))
    p_new = [p_half[i] - dot * nvec[i] for i in range(n)]
    return q_new, p_new, lam_v


def rattle_step(surface: Hypersurface, s: ConstrainedState, h: float, project: bool = True) -> ConstrainedState:
    """Multiplier solve, half kick, drift, normalised normal, tangent projection."""
    q = np.asarray(s.q, dtype=float)
    p = np.asarray(s.p, dtype=float)
    qn, pn, lam = rattle_entries(surface, _entries(q), _entries(p), h, s.lam, project)
    return ConstrainedState(jt.values(qn), jt.values(pn), lam)


def step_derivative(surface: Hypersurface, q, p, h: float, lam):
    """Blocks of the step derivative and the step result.

    Returns ``(q1, p1, (Dq_q1, Dp_q1, Dq_p1, Dp_p1))`` for a step from (q, p)
    whose multiplier is ``lam``; batched over leading axes.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    lam = np.asarray(lam, dtype=float)
    n = q.shape[-1]
    I = np.eye(n)
    g0 = _grad(surface, q)
    H0 = _hess(surface, q)
    p_half = p - 0.5 * h * g0 * lam[..., None]
    q1 = q + h * p_half
    g1 = _grad(surface, q1)
    H1 = _hess(surface, q1)
    nrm1 = np.linalg.norm(g1, axis=-1)
    nv = g1 / nrm1[..., None]
    ng = np.sum(nv * g0, axis=-1)
    # gradients of the multiplier
    grad_q_lam = (-lam[..., None] * np.einsum("...ij,...j->...i", H0, nv) + (2.0 / h**2) * nv) / ng[..., None]
    grad_p_lam = 2.0 * nv / (h * ng[..., None])
    Dq_ph = -0.5 * h * (H0 * lam[..., None, None] + g0[..., :, None] * grad_q_lam[..., None, :])
    Dp_ph = I - 0.5 * h * g0[..., :, None] * grad_p_lam[..., None, :]
    Dq_q1 = I + h * Dq_ph
    Dp_q1 = h * Dp_ph
    nnT = nv[..., :, None] * nv[..., None, :]
    HDq = H1 @ Dq_q1
    HDp = H1 @ Dp_q1
    Dq_n = (HDq - nnT @ HDq) / nrm1[..., None, None]
    Dp_n = (HDp - nnT @ HDp) / nrm1[..., None, None]
    dot = np.sum(nv * p_half, axis=-1)[..., None, None]
    Dq_p1 = Dq_ph - dot * Dq_n - nv[..., :, None] * (p_half[..., None, :] @ Dq_n) - nnT @ Dq_ph
    Dp_p1 = Dp_ph - dot * Dp_n - nv[..., :, None] * (p_half[..., None, :] @ Dp_n) - nnT @ Dp_ph
    p1 = p_half - dot[..., 0] * nv
    return q1, p1, (Dq_q1, Dp_q1, Dq_p1, Dp_p1)


def jet_rattle_step(surface: Hypersurface, js: JetRattleState, h: float) -> JetRattleState:
    """RATTLE step plus V' = D Psi_h V with the exact step derivative."""
    s = js.state
    lam = solve_lambda(surface, s.q, s.p, h, s.lam)
    q1, p1, (A, B, C, D) = step_derivative(surface, s.q, s.p, h, lam)
    n = q1.shape[-1]
    Vq, Vp = js.V[..., :n, :], js.V[..., n:, :]
    V = np.concatenate([A @ Vq + B @ Vp, C @ Vq + D @ Vp], axis=-2)
    return JetRattleState(ConstrainedState(q1, p1, lam), V)


def rattle_flow(surface: Hypersurface, q0, p0, h: float, steps: int, project_every: bool = True) -> ConstrainedState:
    s = ConstrainedState(np.asarray(q0, dtype=float), np.asarray(p0, dtype=float), 0.0)
    for k in range(steps):
        s = rattle_step(surface, s, h, project=project_every or k == steps - 1)
    return s


def jet_rattle_flow(surface: Hypersurface, q0, p0, h: float, steps: int, columns=None) -> JetRattleState:
    js = JetRattleState.start(q0, p0, columns)
    for _ in range(steps):
        js = jet_rattle_step(surface, js, h)
    return js


# ---------------------------------------------------------------------------
# tangent frames


def project_to_surface(surface: Hypersurface, q, tol: float = 1e-14, maxiter: int = 50) -> np.ndarray:
    """Closest-point style Newton along the gradient until |f| < tol."""
    q = np.asarray(q, dtype=float).copy()
    for _ in range(maxiter):
        v = float(_f(surface, q))
        if abs(v) < tol:
            return q
        g = _grad(surface, q)
        q = q - v * g / (g @ g)
    raise RattleError("could not project onto the surface", q)


def tangent_basis(surface: Hypersurface, q_star) -> np.ndarray:
    """n x (n-1) matrix mapping R^(n-1) into the tangent space at ``q_star``.

    Graphs q_n = h(q') use the columns (e_i, df/dq_i); other surfaces get an
    orthonormal kernel basis of v -> <grad f, v>, obtained by orthonormalising
    the projections of the coordinate directions other than the one with the
    largest gradient component, in order.
    """
    q = np.asarray(q_star, dtype=float)
    g = _grad(surface, q)
    n = len(q)
    if not np.linalg.norm(g) > 0.0:
        raise ValueError("zero constraint gradient at q_star")
    if surface.graph:
        A = np.zeros((n, n - 1))
        A[: n - 1] = np.eye(n - 1)
        A[n - 1] = g[: n - 1]
        return A
    nv = g / np.linalg.norm(g)
    skip = int(np.argmax(np.abs(g)))
    cols = []
    for i in range(n):
        if i == skip:
            continue
        v = np.eye(n)[i] - nv[i] * nv
        for c in cols:
            v = v - (c @ v) * c
        cols.append(v / np.linalg.norm(v))
    return np.column_stack(cols)


def _principal_curvatures(surface: Hypersurface, q) -> np.ndarray:
    g = _grad(surface, q)
    A = tangent_basis(surface, q)
    Q, _ = np.linalg.qr(A)
    S = Q.T @ _hess(surface, np.asarray(q, dtype=float)) @ Q / np.linalg.norm(g)
    return np.linalg.eigvalsh(S)


def default_max_arc(surface: Hypersurface, q_star) -> float:
    """1.2 pi / kappa, kappa the smallest positive principal curvature magnitude at q_star.

    On a sphere of radius R this is 1.2 pi R.  Surfaces without a definite
    curvature at q_star need an explicit cap.
    """
    k = np.abs(_principal_curvatures(surface, q_star))
    k_all = _principal_curvatures(surface, q_star)
    if not (np.all(k_all > 0) or np.all(k_all < 0)):
        raise ValueError("curvature at q_star is not definite; pass max_arc")
    return 1.2 * math.pi / float(k.min())


# ---------------------------------------------------------------------------
# conjugate locus


@dataclass
class ConjugateLocus:
    """First conjugate points along unit-speed geodesics from ``q_star``.

    ``rays`` are direction parameters rho (p0 = A rho / |A rho|), ``arc`` the
    arc length of the first degeneracy (nan for degeneracy-free rays),
    ``endpoints`` the conjugate points, ``corank`` that of the reduced matrix.
    """

    q_star: np.ndarray
    A: np.ndarray
    h: float
    max_arc: float
    rays: np.ndarray
    arc: np.ndarray
    endpoints: np.ndarray
    corank: np.ndarray
    det_residual: np.ndarray
    dropped: np.ndarray
    singular_values: np.ndarray | None = None
    cusp_rays: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    cusp_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    @property
    def degenerate(self) -> np.ndarray:
        return np.isfinite(self.arc)


def _reduced(Vqp: np.ndarray, A: np.ndarray, drop: np.ndarray) -> np.ndarray:
    # rows of D_p Q . A without the dropped output coordinate
    M = Vqp @ A
    n = M.shape[-2]
    keep = np.array([[j for j in range(n) if j != d] for d in range(n)])
    rows = keep[drop]
    return np.take_along_axis(M, rows[..., None], axis=-2)


def _drop_index(surface, q) -> np.ndarray:
    return np.argmax(np.abs(_grad(surface, q)), axis=-1)


def conjugate_locus(surface: Hypersurface, q_star, rays, h: float = 0.005, max_arc: float | None = None,
                    root_tol: float = 1e-9, corank_tol: float = 1e-6, find_cusps: bool = True) -> ConjugateLocus:
    """First zero of det(P D_p Q(t) A) along each ray, refined to |det| < root_tol.

    ``rays`` is a (K, n-1) array of direction parameters, or an integer K for
    surfaces in R^3 (K equally spaced angles).  Q(t) is the RATTLE position
    after arc length t; a sign change between steps k and k+1 is refined by
    regula falsi on the size of a final partial step.  P drops the output
    coordinate with the largest gradient component at the current point.
    The search runs ceil(max_arc / h) whole steps, so arcs may exceed
    ``max_arc`` by less than h.
    """
    q_star = np.asarray(q_star, dtype=float)
    n = len(q_star)
    if abs(float(_f(surface, q_star))) > 1e-10:
        raise ValueError("q_star is not on the surface")
    A = tangent_basis(surface, q_star)
    if np.isscalar(rays):
        if n != 3:
            raise ValueError("integer ray counts are only defined for surfaces in R^3")
        th = 2.0 * np.pi * np.arange(int(rays)) / int(rays)
        rays = np.column_stack([np.cos(th), np.sin(th)])
    R = np.asarray(rays, dtype=float).reshape(-1, n - 1)
    K = len(R)
    P0 = R @ A.T
    P0 = P0 / np.linalg.norm(P0, axis=-1, keepdims=True)
    if max_arc is None:
        max_arc = default_max_arc(surface, q_star)
    steps = int(math.ceil(max_arc / h))
    cols = np.zeros((2 * n, n - 1))
    cols[n:] = A  # only D_p . A is needed
    js = JetRattleState.start(np.broadcast_to(q_star, (K, n)), P0, cols)
    arc = np.full(K, np.nan)
    ends = np.full((K, n), np.nan)
    ck = np.full(K, -1)
    resid = np.full(K, np.nan)
    drop = np.full(K, -1)
    sv = np.full((K, n - 1), np.nan)
    prev = js
    active = np.ones(K, dtype=bool)
    for k in range(1, steps + 1):
        cur = jet_rattle_step(surface, prev, h)
        if k > 1:
            d_idx = _drop_index(surface, cur.state.q)
            d_new = np.linalg.det(_reduced(cur.V[:, :n, :], np.eye(n - 1), d_idx))
            d_old = np.linalg.det(_reduced(prev.V[:, :n, :], np.eye(n - 1), d_idx))
            hit = active & (np.sign(d_new) * np.sign(d_old) <= 0) & (d_old != 0.0)
            if hit.any():
                idx = np.where(hit)[0]
                t, st, V, dv = _refine(surface, _take(prev, idx), h, d_idx[idx], d_old[idx], d_new[idx], root_tol)
                arc[idx] = (k - 1) * h + t
                ends[idx] = st.q
                drop[idx] = d_idx[idx]
                resid[idx] = np.abs(dv)
                M = _reduced(V[:, :n, :], np.eye(n - 1), d_idx[idx])
                s = np.linalg.svd(M, compute_uv=False)
                sv[idx] = s
                ck[idx] = np.sum(s <= corank_tol * np.maximum(s[:, :1], 1e-300), axis=-1)
                active[idx] = False
        if not active.any():
            break
        prev = cur
    loc = ConjugateLocus(q_star, A, h, float(max_arc), R, arc, ends, ck, resid, drop, sv)
    if find_cusps and n == 3 and K >= 5:
        _mark_cusps(loc)
    return loc


def sphere_rays(count: int) -> np.ndarray:
    """Nearly uniform unit directions in R^3 (golden-angle spiral)."""
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    r = np.sqrt(1.0 - z**2)
    th = np.pi * (3.0 - math.sqrt(5.0)) * k
    return np.column_stack([r * np.cos(th), r * np.sin(th), z])


def corank2_seeds(loc: ConjugateLocus, count: int = 5) -> np.ndarray:
    """Chart points ``arc * ray`` of the rays whose conjugate matrix is closest to corank 2.

    Rays are ranked by s2 / s1 of the reduced matrix at the conjugate point;
    these seed a corank-2 search in an :class:`ExpMapChart` (u = rho, unit
    speed, so |u| is the arc length).
    """
    if loc.singular_values is None or loc.singular_values.shape[1] < 2:
        raise ValueError("corank-2 seeds need a tangent space of dimension >= 2")
    sv = loc.singular_values
    ratio = np.where(np.isfinite(loc.arc), sv[:, 1] / np.maximum(sv[:, 0], 1e-300), np.inf)
    order = np.argsort(ratio)[:count]
    order = order[np.isfinite(ratio[order])]
    R = loc.rays[order] / np.linalg.norm(loc.rays[order], axis=1, keepdims=True)
    return R * loc.arc[order, None]


def _take(js: JetRattleState, idx) -> JetRattleState:
    s = js.state
    lam = np.broadcast_to(np.asarray(s.lam, dtype=float), s.q.shape[:-1])
    return JetRattleState(ConstrainedState(s.q[idx], s.p[idx], lam[idx]), js.V[idx])


def _refine(surface, js, h, drop, d0, d1, tol, maxiter: int = 60):
    """Regula falsi (Illinois) on the final partial step size in (0, h]."""
    n = js.state.q.shape[-1]
    a = np.zeros(len(drop))
    b = np.full(len(drop), h)
    fa, fb = d0.copy(), d1.copy()
    t = b.copy()
    best = None
    for _ in range(maxiter):
        with np.errstate(all="ignore"):
            t = np.where(fb != fa, b - fb * (b - a) / (fb - fa), 0.5 * (a + b))
        t = np.clip(t, 1e-3 * h, h)
        out = _partial(surface, js, t)
        ft = np.linalg.det(_reduced(out.V[:, :n, :], np.eye(n - 1), drop))
        best = (t, out, ft)
        if np.all(np.abs(ft) < tol):
            break
        same = np.sign(ft) == np.sign(fb)
        # Illinois: halve the retained end value when the same end is kept twice
        fa = np.where(same, 0.5 * fa, fb)
        a = np.where(same, a, b)
        b, fb = t, ft
    t, out, ft = best
    return t, out.state, out.V, ft


def _partial(surface, js, t):
    # a step of per-ray size t; steps are homogeneous in (h, p) so this is one
    # unit-size step with momentum scaled by t, rescaled afterwards
    s = js.state
    n = s.q.shape[-1]
    scaled = JetRattleState(ConstrainedState(s.q, s.p * t[:, None], np.asarray(s.lam) * t**2),
                            np.concatenate([js.V[:, :n], js.V[:, n:] * t[:, None, None]], axis=-2))
    out = jet_rattle_step(surface, scaled, 1.0)
    st = out.state
    V = np.concatenate([out.V[:, :n], out.V[:, n:] / t[:, None, None]], axis=-2)
    return JetRattleState(ConstrainedState(st.q, st.p / t[:, None], st.lam / t**2), V)


def _mark_cusps(loc: ConjugateLocus) -> None:
    """Cusps on a closed ray loop: strict local extrema of the conjugate arc where the locus turns back."""
    r = loc.arc
    K = len(r)
    if not np.isfinite(r).all():
        return
    cand = []
    tol = 1e-8 * float(np.max(np.abs(r)))  # ignore roundoff-level wiggles (e.g. a round sphere)
    for i in range(K):
        a, b, c = r[i - 1], r[i], r[(i + 1) % K]
        if max(abs(b - a), abs(b - c)) <= tol:
            continue
        if (b > a and b >= c) or (b < a and b <= c):
            e = loc.endpoints
            u, v = e[i] - e[i - 1], e[(i + 1) % K] - e[i]
            w, z = e[i - 1] - e[i - 2], e[(i + 2) % K] - e[(i + 1) % K]
            # the chord direction reverses within two rays of the extremum
            if min(u @ v, w @ u, v @ z) < 0.0:
                cand.append(i)
    loc.cusp_rays = np.asarray(cand, dtype=int)
    loc.cusp_points = loc.endpoints[loc.cusp_rays] if cand else np.zeros((0, 3))


# ---------------------------------------------------------------------------
# exp-map chart for level sets in ray coordinates


@dataclass(frozen=True)
class ExpMapChart:
    """Chart u = rho in R^(n-1) for the map rho -> Q(q_star, A rho) after ``steps`` steps of time 1/steps.

    ``blocks`` returns the kept output coordinates X and the reduced matrix
    D = P D_p Q A, so the degeneracy set is {det D = 0}.  At fixed step count
    the map is smooth in rho; the arc-length step is |rho| / steps.
    """

    surface: Hypersurface
    q_star: np.ndarray
    A: np.ndarray
    steps: int
    drop: int

    @classmethod
    def build(cls, surface: Hypersurface, q_star, steps: int = 200, drop: int | None = None) -> "ExpMapChart":
        q_star = np.asarray(q_star, dtype=float)
        A = tangent_basis(surface, q_star)
        if drop is None:
            drop = int(np.argmax(np.abs(_grad(surface, q_star))))
        return cls(surface, q_star, A, int(steps), int(drop))

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def _run(self, u, full: bool = False):
        U = np.asarray(u, dtype=float)
        shape = U.shape[:-1]
        flat = U.reshape(-1, self.dim)
        d = len(self.q_star)
        if full:
            cols = None
        else:
            cols = np.zeros((2 * d, self.dim))
            cols[d:] = self.A
        js = JetRattleState.start(np.broadcast_to(self.q_star, (len(flat), d)), flat @ self.A.T, cols)
        h = 1.0 / self.steps
        for _ in range(self.steps):
            js = jet_rattle_step(self.surface, js, h)
        return shape, js

    def blocks(self, u):
        shape, js = self._run(u)
        d = len(self.q_star)
        keep = [j for j in range(d) if j != self.drop]
        X = js.state.q[:, keep]
        D = js.V[:, keep, :]
        return X.reshape(shape + (len(keep),)), D.reshape(shape + D.shape[1:])

    def full_jacobian_norm(self, u) -> np.ndarray:
        shape, js = self._run(u, full=True)
        return np.linalg.norm(js.V, ord=2, axis=(-2, -1)).reshape(shape)

    def image(self, u, X) -> np.ndarray:
        return np.asarray(X)
