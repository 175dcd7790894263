"""Elementary catastrophes and the D4 level bifurcation sets.

Scalar unfoldings are the seven Thom normal forms.  Their gradients model a
structure-preserving discretisation; :class:`VectorUnfolding` adds the extra
``mu4 * (y, 0)`` direction, which is not a gradient and models a generic
perturbation that ignores the variational structure.

All polynomial evaluators are written with plain arithmetic so they accept
floats, numpy arrays or :class:`hambif.jets.Jet` entries alike.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "KINDS",
    "Unfolding",
    "unfolding_eval",
    "VectorUnfolding",
    "LevelSlice",
    "D4LevelSet",
    "SwallowtailPoint",
    "d4_level_set",
    "swallowtail_points",
    "trace_swallowtails",
    "min_jacobian_norm",
]

KINDS = ("A2", "A3", "A4", "A5", "D4plus", "D4minus", "D5")
_ARITY = {"A2": 1, "A3": 1, "A4": 1, "A5": 1, "D4plus": 2, "D4minus": 2, "D5": 2}
_NPARAM = {"A2": 1, "A3": 2, "A4": 3, "A5": 4, "D4plus": 3, "D4minus": 3, "D5": 4}


def _kind(kind: str) -> str:
    aliases = {"plus": "D4plus", "minus": "D4minus", "+": "D4plus", "-": "D4minus"}
    kind = aliases.get(kind, kind)
    if kind not in KINDS:
        raise ValueError(f"unknown catastrophe {kind!r}; expected one of {KINDS}")
    return kind


@dataclass(frozen=True)
class Unfolding:
    """Miniversal unfolding ``g_mu`` of one of the seven elementary catastrophes.

    A-series: ``x**(k+1) + sum_i mu_i x**i`` (i = 1..k-1).  D-series:
    ``x^3 + x y^2 + mu3 (x^2 - y^2) + mu2 y + mu1 x`` (D4plus),
    ``x^3 - x y^2 + mu3 (x^2 + y^2) + mu2 y + mu1 x`` (D4minus) and
    ``x^2 y + y^4 + mu4 x^2 + mu3 y^2 + mu2 y + mu1 x`` (D5).
    ``mu`` is always ordered ``(mu1, mu2, ...)``.
    """

    kind: str

    def __post_init__(self):
        object.__setattr__(self, "kind", _kind(self.kind))

    @property
    def arity(self) -> int:
        return _ARITY[self.kind]

    @property
    def n_params(self) -> int:
        return _NPARAM[self.kind]

    def _check(self, point, mu):
        mu = np.asarray(mu, dtype=float).reshape(-1)
        if mu.size != self.n_params:
            raise ValueError(f"{self.kind} takes {self.n_params} parameters, got {mu.size}")
        if isinstance(point, (list, tuple)):
            coords = list(point)
        else:
            arr = np.asarray(point, dtype=float)
            if arr.ndim == 0:
                arr = arr[None]
            coords = [arr[..., i] for i in range(arr.shape[-1])]
        if len(coords) != self.arity:
            raise ValueError(f"{self.kind} acts on {self.arity} variable(s), got {len(coords)}")
        return coords, mu

    # the three evaluators share one coordinate convention: entries in, entries out

    def value(self, point, mu):
        c, mu = self._check(point, mu)
        if self.arity == 1:
            x = c[0]
            out = x ** (self.n_params + 2)
            for i, m in enumerate(mu, start=1):
                out = out + m * x**i
            return out
        x, y = c
        if self.kind == "D4plus":
            return x**3 + x * y**2 + mu[2] * (x**2 - y**2) + mu[1] * y + mu[0] * x
        if self.kind == "D4minus":
            return x**3 - x * y**2 + mu[2] * (x**2 + y**2) + mu[1] * y + mu[0] * x
        return x**2 * y + y**4 + mu[3] * x**2 + mu[2] * y**2 + mu[1] * y + mu[0] * x

    def gradient_entries(self, point, mu) -> list:
        c, mu = self._check(point, mu)
        if self.arity == 1:
            x = c[0]
            top = self.n_params + 2
            out = top * x ** (top - 1)
            for i, m in enumerate(mu, start=1):
                out = out + (i * m) * x ** (i - 1)
            return [out]
        x, y = c
        if self.kind == "D4plus":
            return [3 * x**2 + y**2 + 2 * mu[2] * x + mu[0], 2 * x * y - 2 * mu[2] * y + mu[1]]
        if self.kind == "D4minus":
            return [3 * x**2 - y**2 + 2 * mu[2] * x + mu[0], -2 * x * y + 2 * mu[2] * y + mu[1]]
        return [2 * x * y + 2 * mu[3] * x + mu[0], x**2 + 4 * y**3 + 2 * mu[2] * y + mu[1]]

    def grad(self, point, mu) -> np.ndarray:
        g = self.gradient_entries(point, mu)
        shape = np.broadcast_shapes(*(np.shape(e) for e in g))
        return np.stack([np.broadcast_to(np.asarray(e, dtype=float), shape) for e in g], axis=-1)

    def hess(self, point, mu) -> np.ndarray:
        c, mu = self._check(point, mu)
        c = [np.asarray(e, dtype=float) for e in c]
        if self.arity == 1:
            x = c[0]
            top = self.n_params + 2
            h = top * (top - 1) * x ** (top - 2)
            for i, m in enumerate(mu, start=1):
                if i >= 2:
                    h = h + i * (i - 1) * m * x ** (i - 2)
            return np.asarray(h)[..., None, None]
        x, y = c
        if self.kind == "D4plus":
            rows = [[6 * x + 2 * mu[2], 2 * y], [2 * y, 2 * x - 2 * mu[2]]]
        elif self.kind == "D4minus":
            rows = [[6 * x + 2 * mu[2], -2 * y], [-2 * y, -2 * x + 2 * mu[2]]]
        else:
            rows = [[2 * y + 2 * mu[3], 2 * x], [2 * x, 12 * y**2 + 2 * mu[2]]]
        shape = np.broadcast_shapes(x.shape, y.shape)
        return np.stack(
            [np.stack([np.broadcast_to(np.asarray(e, float), shape) for e in r], -1) for r in rows], -2
        )


def unfolding_eval(kind: str, mu, point):
    """``(value, grad, hess)`` of the named unfolding at ``point``."""
    u = Unfolding(kind)
    return np.asarray(u.value(point, mu), dtype=float), u.grad(point, mu), u.hess(point, mu)


@dataclass(frozen=True)
class VectorUnfolding:
    """Universal unfolding of ``grad g`` for ``g = x^2 y +- y^(k+1)`` among all maps.

    For ``k = 2`` the umbilic normal forms are used::

        f = (2s xy - 2s mu3 x + mu4 y + mu1,  s x^2 + 3y^2 + 2 mu3 y + mu2)

    with ``s = +1`` (hyperbolic) or ``s = -1`` (elliptic).  At ``mu4 = 0`` this
    is the gradient of the tabulated D4 unfolding with ``x`` and ``y`` (and
    ``mu1``, ``mu2``) interchanged; see :meth:`potential`.

    For ``k > 2``::

        f = (2xy + mu1 + mu3 x + mu4 y,  x^2 +- (k+1) y^k + mu2 + sum_j nu_j y^j)

    with ``j = 1..k-2``; parameters are ``(mu1, mu2, mu3, mu4, nu_1, ...)``.
    """

    sign: int = 1
    k: int = 2

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if int(self.k) != self.k or self.k < 2:
            raise ValueError("k must be an integer >= 2")

    @classmethod
    def d4(cls, kind: str) -> "VectorUnfolding":
        kind = _kind(kind)
        if kind not in ("D4plus", "D4minus"):
            raise ValueError("only D4plus / D4minus have a k = 2 vector unfolding")
        return cls(1 if kind == "D4plus" else -1, 2)

    @property
    def kind(self) -> str:
        if self.k == 2:
            return "D4plus" if self.sign > 0 else "D4minus"
        return f"D{self.k + 2}{'plus' if self.sign > 0 else 'minus'}"

    @property
    def n_params(self) -> int:
        return 4 + (self.k - 2)

    def _mu(self, mu) -> np.ndarray:
        mu = np.asarray(mu, dtype=float).reshape(-1)
        if mu.size == self.n_params - 1:
            mu = np.append(mu[:3], np.concatenate([[0.0], mu[3:]]))
        if mu.size != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {mu.size}")
        return mu

    def entries(self, x, y, mu) -> list:
        mu = self._mu(mu)
        s = self.sign
        if self.k == 2:
            f1 = 2 * s * x * y - 2 * s * mu[2] * x + mu[3] * y + mu[0]
            f2 = s * x**2 + 3 * y**2 + 2 * mu[2] * y + mu[1]
            return [f1, f2]
        f1 = 2 * x * y + mu[0] + mu[2] * x + mu[3] * y
        f2 = x**2 + s * (self.k + 1) * y**self.k + mu[1]
        for j, nu in enumerate(mu[4:], start=1):
            f2 = f2 + nu * y**j
        return [f1, f2]

    def __call__(self, point, mu) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        f = self.entries(p[..., 0], p[..., 1], mu)
        return np.stack(np.broadcast_arrays(*f), axis=-1)

    def jacobian(self, point, mu) -> np.ndarray:
        mu = self._mu(mu)
        p = np.asarray(point, dtype=float)
        x, y = p[..., 0], p[..., 1]
        s = self.sign
        if self.k == 2:
            rows = [[2 * s * y - 2 * s * mu[2], 2 * s * x + mu[3]], [2 * s * x, 6 * y + 2 * mu[2]]]
        else:
            d22 = s * (self.k + 1) * self.k * y ** (self.k - 1)
            for j, nu in enumerate(mu[4:], start=1):
                d22 = d22 + j * nu * y ** (j - 1)
            rows = [[2 * y + mu[2], 2 * x + mu[3]], [2 * x, d22]]
        shape = x.shape
        return np.stack(
            [np.stack([np.broadcast_to(np.asarray(e, float), shape) for e in r], -1) for r in rows], -2
        )

    def second_derivatives(self, point, mu) -> np.ndarray:
        """``T[i, j, l] = d^2 f_i / dx_j dx_l`` at a single point."""
        mu = self._mu(mu)
        x, y = (float(v) for v in np.asarray(point, dtype=float))
        s = self.sign
        T = np.zeros((2, 2, 2))
        if self.k == 2:
            T[0] = [[0.0, 2 * s], [2 * s, 0.0]]
            T[1] = [[2 * s, 0.0], [0.0, 6.0]]
            return T
        T[0] = [[0.0, 2.0], [2.0, 0.0]]
        d3 = s * (self.k + 1) * self.k * (self.k - 1) * y ** (self.k - 2)
        for j, nu in enumerate(mu[4:], start=1):
            if j >= 2:
                d3 += j * (j - 1) * nu * y ** (j - 2)
        T[1] = [[2.0, 0.0], [0.0, d3]]
        return T

    def det(self, point, mu) -> np.ndarray:
        return np.linalg.det(self.jacobian(point, mu)) if self.k != 2 else self._det2(point, mu)

    def _det2(self, point, mu):
        mu = self._mu(mu)
        p = np.asarray(point, dtype=float)
        x, y = p[..., 0], p[..., 1]
        s = self.sign
        return -4 * (x + s * mu[3] / 4) ** 2 + 12 * s * (y - mu[2] / 3) ** 2 + mu[3] ** 2 / 4 - 16 / 3 * s * mu[2] ** 2

    def potential(self, x, y, mu):
        """Scalar ``h`` with ``grad h = f`` when ``mu4 = 0`` (the mu4 entry is ignored)."""
        mu = self._mu(mu)
        if self.k == 2:
            return Unfolding(self.kind).value([y, x], [mu[1], mu[0], mu[2]])
        s = self.sign
        h = x**2 * y + s * y ** (self.k + 1) + mu[0] * x + mu[1] * y + 0.5 * mu[2] * x**2
        for j, nu in enumerate(mu[4:], start=1):
            h = h + nu * y ** (j + 1) / (j + 1)
        return h


# ---------------------------------------------------------------------------
# level bifurcation sets of the k = 2 family


@dataclass
class LevelSlice:
    """One ``mu3 = const`` slice: the fold curve in (x, y) and its image in (mu1, mu2).

    ``branches`` holds each connected piece of the zero curve of ``det Df``
    (arrays of shape (m, 2)); ``images`` the matching ``(mu1, mu2)`` arrays.
    Cusp points are where the curve's image has zero velocity.
    """

    mu3: float
    branches: list = field(default_factory=list)
    images: list = field(default_factory=list)
    cusp_xy: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    cusp_mu: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    @property
    def n_cusps(self) -> int:
        return len(self.cusp_xy)

    @property
    def empty(self) -> bool:
        return not self.branches


@dataclass
class D4LevelSet:
    kind: str
    mu4: float
    window: float
    slices: list

    def points(self) -> np.ndarray:
        """All surface samples as rows ``(mu1, mu2, mu3, x, y)``."""
        rows = []
        for sl in self.slices:
            for xy, im in zip(sl.branches, sl.images):
                rows.append(np.column_stack([im, np.full(len(xy), sl.mu3), xy]))
        return np.vstack(rows) if rows else np.zeros((0, 5))

    def cusps(self) -> np.ndarray:
        """Cusp-edge samples as rows ``(mu1, mu2, mu3, x, y)``."""
        rows = [
            np.column_stack([sl.cusp_mu, np.full(sl.n_cusps, sl.mu3), sl.cusp_xy])
            for sl in self.slices
            if sl.n_cusps
        ]
        return np.vstack(rows) if rows else np.zeros((0, 5))

    def vertex(self):
        """Surface sample with the smallest ``||Df||_F``: ``(row, norm)``."""
        pts = self.points()
        if not len(pts):
            raise ValueError("level set is empty")
        vf = VectorUnfolding.d4(self.kind)
        norms = np.array(
            [np.linalg.norm(vf.jacobian(r[3:5], [r[0], r[1], r[2], self.mu4])) for r in pts]
        )
        i = int(np.argmin(norms))
        return pts[i], float(norms[i])


def _conic(sign: int, mu3: float, mu4: float, window: float, grid: int):
    """Closed-form pieces of ``det Df = 0`` inside the box ``|x|, |y| <= window``.

    Returns ``[(xy(t), dxy/dt(t), t_grid), ...]``, one entry per smooth branch.
    """
    cx, cy = -sign * mu4 / 4, mu3 / 3
    K = mu4**2 / 4 - 16 / 3 * sign * mu3**2
    rad = window * np.sqrt(2) + abs(cx) + abs(cy)
    a, b = 0.5, 1 / np.sqrt(12)  # 4X^2 = 1 <-> X = 1/2, 12Y^2 = 1 <-> Y = 1/sqrt(12)
    pieces = []
    scale = np.sqrt(abs(K))
    if sign < 0:
        # 4X^2 + 12Y^2 = K: ellipse (or the centre point when K = 0)
        if K <= 0.0:
            return [(lambda t: np.column_stack([np.full_like(t, cx), np.full_like(t, cy)]),
                     lambda t: np.zeros((len(t), 2)), np.zeros(1))]
        xy = lambda t: np.column_stack([cx + scale * a * np.cos(t), cy + scale * b * np.sin(t)])
        dxy = lambda t: np.column_stack([-scale * a * np.sin(t), scale * b * np.cos(t)])
        pieces.append((xy, dxy, np.linspace(0.0, 2 * np.pi, grid, endpoint=False)))
        return pieces
    if K == 0.0:
        for sy in (1.0, -1.0):
            xy = lambda t, sy=sy: np.column_stack([cx + np.sqrt(3) * t, cy + sy * t])
            dxy = lambda t, sy=sy: np.column_stack([np.full_like(t, np.sqrt(3)), np.full_like(t, sy)])
            # keep the crossing point (the umbilic when mu3 = mu4 = 0) on the grid
            pieces.append((xy, dxy, np.union1d(np.linspace(-rad, rad, grid), [0.0])))
        return pieces
    T = np.arcsinh(rad / (scale * min(a, b)))
    t = np.linspace(-T, T, grid)
    for br in (1.0, -1.0):
        if K > 0:  # 4X^2 - 12Y^2 = K: branches open along x
            xy = lambda t, br=br: np.column_stack([cx + br * scale * a * np.cosh(t), cy + scale * b * np.sinh(t)])
            dxy = lambda t, br=br: np.column_stack([br * scale * a * np.sinh(t), scale * b * np.cosh(t)])
        else:  # branches open along y
            xy = lambda t, br=br: np.column_stack([cx + scale * a * np.sinh(t), cy + br * scale * b * np.cosh(t)])
            dxy = lambda t, br=br: np.column_stack([scale * a * np.cosh(t), br * scale * b * np.sinh(t)])
        pieces.append((xy, dxy, t))
    return pieces


def _kernel(J: np.ndarray) -> np.ndarray:
    """Unit kernel vectors of (numerically) rank-one 2x2 matrices."""
    return np.linalg.svd(J)[2][..., -1, :]


def _cusp_function(vf, mu, xy_fn, dxy_fn, t, ref=None):
    """Cross product of the kernel of Df with the curve tangent; zero at cusps."""
    p = xy_fn(t)
    k = _kernel(vf.jacobian(p, mu))
    if ref is not None:
        k = k * np.where(np.sum(k * ref, axis=-1) < 0, -1.0, 1.0)[:, None]
    else:
        for i in range(1, len(k)):
            if k[i] @ k[i - 1] < 0:
                k[i] = -k[i]
    d = dxy_fn(t)
    return k[:, 0] * d[:, 1] - k[:, 1] * d[:, 0], k


def _bisect_cusp(vf, mu, xy_fn, dxy_fn, t0, t1, k0, tol=1e-14):
    g0, _ = _cusp_function(vf, mu, xy_fn, dxy_fn, np.array([t0]), k0)
    for _ in range(200):
        tm = 0.5 * (t0 + t1)
        gm, km = _cusp_function(vf, mu, xy_fn, dxy_fn, np.array([tm]), k0)
        if np.sign(gm[0]) == np.sign(g0[0]):
            t0, g0, k0 = tm, gm, km[0]
        else:
            t1 = tm
        if abs(t1 - t0) < tol * max(1.0, abs(t0)):
            break
    return 0.5 * (t0 + t1)


def _slice(vf: VectorUnfolding, mu3: float, mu4: float, window: float, grid: int) -> LevelSlice:
    sl = LevelSlice(float(mu3))
    mu0 = np.array([0.0, 0.0, mu3, mu4])
    cusp_xy, cusp_mu = [], []
    for xy_fn, dxy_fn, t in _conic(vf.sign, mu3, mu4, window, grid):
        p = xy_fn(t)
        inside = np.all(np.abs(p) <= window, axis=1)
        if not inside.any():
            continue
        f0 = vf(p, mu0)
        sl.branches.append(p[inside])
        sl.images.append(-f0[inside])
        if len(t) < 2:
            continue
        closed = vf.sign < 0
        tt = np.append(t, t[0] + 2 * np.pi) if closed else t
        g, k = _cusp_function(vf, mu0, xy_fn, dxy_fn, tt)
        for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
            ts = _bisect_cusp(vf, mu0, xy_fn, dxy_fn, tt[i], tt[i + 1], k[i])
            q = xy_fn(np.array([ts]))[0]
            if np.all(np.abs(q) <= window):
                cusp_xy.append(q)
                cusp_mu.append(-vf(q, mu0))
    if cusp_xy:
        sl.cusp_xy, sl.cusp_mu = np.array(cusp_xy), np.array(cusp_mu)
    return sl


def d4_level_set(kind: str, mu3_values, mu4: float, grid: int = 128, window: float = 2.0,
                 workers: int = 1) -> D4LevelSet:
    """Level bifurcation set of the (perturbed) D4 unfolding, sliced at fixed ``mu3``.

    For each slice the zero set of ``det Df`` is a conic in (x, y), sampled in
    closed form with ``grid`` points per branch; ``(mu1, mu2)`` follow linearly
    from ``f = 0``.  Slices whose curve misses the box are kept but empty.
    Slices are independent; ``workers > 1`` computes them on a thread pool.
    """
    if grid < 32:
        raise ValueError("grid must be at least 32")
    vf = VectorUnfolding.d4(kind)
    mu3s = [float(m3) for m3 in np.atleast_1d(mu3_values)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            slices = list(pool.map(lambda m3: _slice(vf, m3, float(mu4), window, grid), mu3s))
    else:
        slices = [_slice(vf, m3, float(mu4), window, grid) for m3 in mu3s]
    return D4LevelSet(vf.kind, float(mu4), float(window), slices)


# ---------------------------------------------------------------------------
# swallowtail points of the perturbed hyperbolic umbilic


@dataclass(frozen=True)
class SwallowtailPoint:
    xy: tuple
    mu3: float
    mu12: tuple

    @property
    def mu(self) -> tuple:
        return (self.mu12[0], self.mu12[1], self.mu3)


def _with_mu12(x: float, y: float, mu3: float, mu4: float) -> SwallowtailPoint:
    f0 = VectorUnfolding(1, 2)(np.array([x, y]), [0.0, 0.0, mu3, mu4])
    return SwallowtailPoint((float(x), float(y)), float(mu3), (float(-f0[0]), float(-f0[1])))


def swallowtail_points(mu4: float) -> list[SwallowtailPoint]:
    """Closed-form swallowtail points of the perturbed D4plus family.

    They sit at ``(x, y) = (-mu4/4, +-sqrt(3) mu4 / 24)`` with
    ``mu3 = +-sqrt(3) mu4 / 8``.  For ``mu4 = 0`` they merge into the umbilic
    at the origin, which is returned alone.
    """
    mu4 = float(mu4)
    if mu4 == 0.0:
        return [_with_mu12(0.0, 0.0, 0.0, 0.0)]
    r3 = np.sqrt(3.0)
    return [_with_mu12(-mu4 / 4, s * r3 * mu4 / 24, s * r3 * mu4 / 8, mu4) for s in (1.0, -1.0)]


def _a4_indicator(vf: VectorUnfolding, xy, mu, col: int | None = None, step: float = 1e-6):
    """Second kernel derivative of ``det Df`` at a cusp; changes sign at A4 points.

    With ``k`` an adjugate column of ``Df`` (a kernel field on the fold curve)
    and ``psi = grad(det Df) . k``, cusps are the fold points with ``psi = 0``
    and swallowtails additionally have ``grad(psi) . k = 0``.
    """
    def adj(J):
        return np.array([[J[1, 1], -J[0, 1]], [-J[1, 0], J[0, 0]]])

    def psi(p):
        J = vf.jacobian(p, mu)
        T = vf.second_derivatives(p, mu)
        A = adj(J)
        g = np.array([np.trace(A @ T[:, :, j]) for j in range(2)])
        return g @ A[:, col], A[:, col]

    xy = np.asarray(xy, dtype=float)
    if col is None:
        col = int(np.argmax(np.linalg.norm(adj(vf.jacobian(xy, mu)), axis=0)))
    _, k = psi(xy)
    grad = np.array(
        [(psi(xy + step * e)[0] - psi(xy - step * e)[0]) / (2 * step) for e in np.eye(2)]
    )
    return float(grad @ k), col


def _track(vf, mu3, mu4, window, grid, near):
    pts = _slice(vf, mu3, mu4, window, grid).cusp_xy
    if not len(pts):
        return None
    return pts[np.argmin(np.linalg.norm(pts - near, axis=1))]


def trace_swallowtails(
    mu4: float,
    mu3_span: float | None = None,
    n_slices: int = 201,
    window: float | None = None,
    grid: int = 512,
    tol: float = 1e-12,
) -> list[SwallowtailPoint]:
    """Locate swallowtail points of the perturbed D4plus family from the level set.

    Cusp points are extracted slice by slice and followed in ``mu3``.  Along
    each followed cusp curve the A4 indicator (see ``_a4_indicator``) is
    evaluated; its sign changes are bisected in ``mu3``.
    """
    vf = VectorUnfolding(1, 2)
    scale = max(abs(mu4), 1e-3)
    span = 2.0 * scale if mu3_span is None else float(mu3_span)
    window = 4.0 * scale if window is None else float(window)
    mu3s = np.linspace(-span, span, n_slices)
    found = []
    start = _slice(vf, mu3s[0], mu4, window, grid).cusp_xy
    for c0 in start:
        prev, prev_mu3, col = c0, mu3s[0], None
        ind, col = _a4_indicator(vf, prev, [0.0, 0.0, prev_mu3, mu4], col)
        for m3 in mu3s[1:]:
            cur = _track(vf, m3, mu4, window, grid, prev)
            if cur is None:
                break
            ind_cur, _ = _a4_indicator(vf, cur, [0.0, 0.0, m3, mu4], col)
            if np.sign(ind_cur) != np.sign(ind) and ind_cur != 0.0:
                lo, hi, p_lo, s_lo = prev_mu3, m3, prev, np.sign(ind)
                while hi - lo > tol * max(1.0, abs(lo)):
                    mid = 0.5 * (lo + hi)
                    p_mid = _track(vf, mid, mu4, window, grid, p_lo)
                    s_mid = np.sign(_a4_indicator(vf, p_mid, [0.0, 0.0, mid, mu4], col)[0])
                    if s_mid == s_lo:
                        lo, p_lo = mid, p_mid
                    else:
                        hi = mid
                x, y = _track(vf, 0.5 * (lo + hi), mu4, window, grid, p_lo)
                found.append(_with_mu12(x, y, 0.5 * (lo + hi), mu4))
            prev, prev_mu3, ind = cur, m3, ind_cur
    return found


def min_jacobian_norm(kind: str, mu3: float, mu4: float, window: float = 2.0, grid: int = 401):
    """Minimum of ``||Df||_F`` over a square grid; returns ``(value, (x, y))``.

    ``grid`` odd keeps the origin on the grid.
    """
    vf = VectorUnfolding.d4(kind)
    s = np.linspace(-window, window, grid)
    X, Y = np.meshgrid(s, s, indexing="ij")
    J = vf.jacobian(np.stack([X, Y], -1), [0.0, 0.0, mu3, mu4])
    n = np.sqrt(np.sum(J**2, axis=(-2, -1)))
    i = np.unravel_index(np.argmin(n), n.shape)
    return float(n[i]), (float(X[i]), float(Y[i]))
