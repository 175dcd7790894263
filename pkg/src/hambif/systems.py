"""Scenario catalog: Hamiltonian systems, boundary data and hypersurfaces.

Every callable here is *jet-evaluable*: it is written against
:mod:`hambif.jets`, so it accepts plain floats, numpy arrays (batches) or
:class:`~hambif.jets.Jet` entries.  Phase-space points are passed around as
sequences of entries ``q = [q_1, ..., q_n]``, ``p = [p_1, ..., p_n]`` and the
parameter vector ``mu`` likewise.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import jets as jt
from .jets import cos, exp, sin

__all__ = [
    "HamiltonianSystem",
    "ExplicitSymplecticMap",
    "SeparatedBVP",
    "Hypersurface",
    "CatalogError",
    "CATALOG_NAMES",
    "HYPERSURFACE_NAMES",
    "catalog_build",
    "build_torus_system",
    "torus_integrals",
    "apply_linear_transform",
    "hypersurface_catalog",
    "scenario_bvp",
    "Scenario",
    "load_scenario",
    "symplectic_residual",
    "standard_J",
]


class CatalogError(KeyError):
    pass


def standard_J(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def symplectic_residual(M: np.ndarray) -> float:
    """max |M^T J M - J| for a (batch of) 2n x 2n matrices."""
    M = np.asarray(M, dtype=float)
    J = standard_J(M.shape[-1] // 2)
    R = np.swapaxes(M, -1, -2) @ J @ M - J
    return float(np.max(np.abs(R)))


def _param_list(mu, default) -> list:
    # batched parameters must come wrapped in a list: [array]
    if mu is None:
        return list(default)
    if isinstance(mu, (list, tuple)):
        return list(mu)
    if isinstance(mu, jt.Jet):
        return [mu]
    return list(np.atleast_1d(np.asarray(mu, dtype=float)))


# ---------------------------------------------------------------------------
# system containers


@dataclass(frozen=True)
class HamiltonianSystem:
    """Hamiltonian H(q, p; mu) on R^{2n} with hand-coded, jet-evaluable gradients.

    ``separable`` is an optional pair ``(T(p, mu), V(q, mu))`` with ``H = T + V``;
    its presence enables the explicit Stoermer-Verlet step.
    """

    dim_n: int
    H: Callable
    dH_dq: Callable
    dH_dp: Callable
    label: str
    mu_default: tuple = ()
    separable: tuple | None = None

    def mu(self, mu=None) -> list:
        return _param_list(mu, self.mu_default)

    def energy(self, q, p, mu=None):
        return self.H(list(q), list(p), self.mu(mu))

    def vector_field(self, q, p, mu=None):
        """Hamilton's equations (dq/dt, dp/dt) = (dH/dp, -dH/dq)."""
        mu = self.mu(mu)
        return list(self.dH_dp(q, p, mu)), [-g for g in self.dH_dq(q, p, mu)]

    def gradient_from_jets(self, z, mu=None) -> np.ndarray:
        """(dH/dq, dH/dp) at ``z`` obtained by differentiating H itself with jets."""
        n = self.dim_n
        mu = self.mu(mu)
        return jt.jacobian(lambda e: self.H(e[:n], e[n:], mu), z)[..., 0, :]


@dataclass(frozen=True)
class ExplicitSymplecticMap:
    """A closed-form map (q, p; mu) -> (Q, P), used in place of a flow."""

    dim_n: int
    map: Callable
    label: str
    mu_default: tuple = ()

    def mu(self, mu=None) -> list:
        return _param_list(mu, self.mu_default)

    def __call__(self, q, p, mu=None):
        return self.map(list(q), list(p), self.mu(mu))


# ---------------------------------------------------------------------------
# catalog Hamiltonians


def _bratu(C: float) -> HamiltonianSystem:
    def T(p, mu):
        return 0.5 * p[0] * p[0]

    def V(q, mu):
        return mu[0] * exp(q[0])

    return HamiltonianSystem(
        dim_n=1,
        H=lambda q, p, mu: T(p, mu) + V(q, mu),
        dH_dq=lambda q, p, mu: [mu[0] * exp(q[0])],
        dH_dp=lambda q, p, mu: [p[0]],
        label="bratu",
        mu_default=(float(C),),
        separable=(T, V),
    )


def _henon_heiles(perturbed: bool) -> HamiltonianSystem:
    eps = 0.01 if perturbed else 0.0

    def T(p, mu):
        t = 0.5 * (p[0] * p[0] + p[1] * p[1])
        if eps:
            t = t + eps * p[1] * sin(p[0])
        return t

    def V(q, mu):
        x1, x2 = q
        return 0.5 * (x1 * x1 + x2 * x2) - 10.0 * (x1 * x1 * x2 - x2 * x2 * x2 / 3.0)

    def dH_dq(q, p, mu):
        x1, x2 = q
        return [x1 - 20.0 * x1 * x2, x2 - 10.0 * (x1 * x1 - x2 * x2)]

    def dH_dp(q, p, mu):
        if not eps:
            return [p[0], p[1]]
        return [p[0] + eps * p[1] * cos(p[0]), p[1] + eps * sin(p[0])]

    return HamiltonianSystem(
        dim_n=2,
        H=lambda q, p, mu: T(p, mu) + V(q, mu),
        dH_dq=dH_dq,
        dH_dp=dH_dp,
        label="henon_heiles_perturbed" if perturbed else "henon_heiles",
        mu_default=(),
        separable=(T, V),
    )


def _planar_pitchfork(mu0: float) -> HamiltonianSystem:
    def T(p, mu):
        return p[0] * p[0] + 0.1 * p[0] ** 3 - 0.01 * cos(p[0])

    def V(q, mu):
        return q[0] ** 3 - 0.01 * q[0] * q[0] + mu[0] * q[0]

    return HamiltonianSystem(
        dim_n=1,
        H=lambda q, p, mu: T(p, mu) + V(q, mu),
        dH_dq=lambda q, p, mu: [3.0 * q[0] * q[0] - 0.02 * q[0] + mu[0]],
        dH_dp=lambda q, p, mu: [2.0 * p[0] + 0.3 * p[0] * p[0] + 0.01 * sin(p[0])],
        label="planar_pitchfork",
        mu_default=(float(mu0),),
        separable=(T, V),
    )


def _cyclic_4d(mu0: float, symbroken: bool) -> HamiltonianSystem:
    tilt = 0.01 if symbroken else 0.0

    def T(p, mu):
        p1, p2 = p
        return p1 * p2 + p1 * p1 + 0.1 * (p1**3 + p2**3)

    def V(q, mu):
        v = q[0] ** 3 + mu[0] * q[0]
        if tilt:
            v = v + tilt * q[1]
        return v

    def dH_dq(q, p, mu):
        # the constant tilt still has to broadcast like q
        return [3.0 * q[0] * q[0] + mu[0], 0.0 * q[1] + tilt]

    def dH_dp(q, p, mu):
        p1, p2 = p
        return [p2 + 2.0 * p1 + 0.3 * p1 * p1, p1 + 0.3 * p2 * p2]

    return HamiltonianSystem(
        dim_n=2,
        H=lambda q, p, mu: T(p, mu) + V(q, mu),
        dH_dq=dH_dq,
        dH_dp=dH_dp,
        label="cyclic_4d_symbroken" if symbroken else "cyclic_4d",
        mu_default=(float(mu0),),
        separable=(T, V),
    )


def _example5_fold(mu0: float) -> ExplicitSymplecticMap:
    # n = 1 reduction of the generating function y^3 + mu*y + (Y + y)^2
    def phi(q, p, mu):
        x, y = q[0], p[0]
        X = 3.0 * y * y + mu[0] - x
        Y = 0.5 * (x - 3.0 * y * y - mu[0]) - y
        return [X], [Y]

    return ExplicitSymplecticMap(dim_n=1, map=phi, label="example5_fold", mu_default=(float(mu0),))


def _torus_parts(eps: float, kappa: float):
    def lifted_momenta(q, p):
        # solve Dh(q)^T pbar = p by Cramer's rule
        s1, s2 = sin(q[0]), sin(q[1])
        det = 1.0 - eps * kappa * s1 * s2
        pb1 = (p[0] + kappa * s1 * p[1]) / det
        pb2 = (p[1] + eps * s2 * p[0]) / det
        return pb1, pb2, det

    return lifted_momenta


def build_torus_system(eps: float, kappa: float, mu: float = 0.0) -> HamiltonianSystem:
    """Integrable 4d system H = Hbar o Psi with Hbar = pb1^3 + mu pb1 + pb2^2.

    Psi is the cotangent lift of h(q) = (q1 + eps cos q2, q2 + kappa cos q1);
    angles are integrated on the covering space R^2.
    """
    for name, v in (("eps", eps), ("kappa", kappa)):
        if not (-1.0 < v < 1.0) or v == 0.0:
            raise ValueError(f"{name} must lie in (-1, 1) without 0, got {v}")
    lifted = _torus_parts(eps, kappa)

    def _checked(det):
        if np.any(np.abs(jt.value_of(det)) < 1e-12):
            raise FloatingPointError("cotangent lift singular: |det Dh| < 1e-12")

    def H(q, p, mu):
        pb1, pb2, det = lifted(q, p)
        _checked(det)
        return pb1**3 + mu[0] * pb1 + pb2 * pb2

    def _grads(q, p, mu):
        pb1, pb2, det = lifted(q, p)
        _checked(det)
        g1 = 3.0 * pb1 * pb1 + mu[0]
        g2 = 2.0 * pb2
        s1, s2 = sin(q[0]), sin(q[1])
        # u = Dh^{-1} g
        u1 = (g1 + eps * s2 * g2) / det
        u2 = (g2 + kappa * s1 * g1) / det
        dq = [kappa * cos(q[0]) * pb2 * u1, eps * cos(q[1]) * pb1 * u2]
        return dq, [u1, u2]

    return HamiltonianSystem(
        dim_n=2,
        H=H,
        dH_dq=lambda q, p, mu: _grads(q, p, mu)[0],
        dH_dp=lambda q, p, mu: _grads(q, p, mu)[1],
        label=f"torus_integrable(eps={eps}, kappa={kappa})",
        mu_default=(float(mu),),
        separable=None,
    )


def torus_integrals(eps: float, kappa: float, q, p):
    """First integrals (pb1, pb2) of the torus system, i.e. the lifted momenta."""
    pb1, pb2, _ = _torus_parts(eps, kappa)(q, p)
    return pb1, pb2


def _matvec(M: np.ndarray, entries: Sequence) -> list:
    out = []
    for row in np.asarray(M, dtype=float):
        acc = None
        for a, e in zip(row, entries):
            if a != 0.0:
                acc = a * e if acc is None else acc + a * e
        out.append(0.0 * entries[0] if acc is None else acc)
    return out


def apply_linear_transform(system: HamiltonianSystem, bvp: "SeparatedBVP | None", A):
    """Transport a system (and Dirichlet boundary data) through Psi(q, p) = (A q, A^{-T} p)."""
    A = np.asarray(A, dtype=float)
    n = system.dim_n
    if A.shape != (n, n):
        raise ValueError(f"A must be {n}x{n}")
    if abs(np.linalg.det(A)) < 1e-14 or np.linalg.cond(A) > 1e14:
        raise np.linalg.LinAlgError("singular transformation matrix")
    if np.array_equal(A, np.eye(n)):
        return system, bvp
    Ainv = np.linalg.inv(A)
    AinvT = Ainv.T
    AT = A.T

    def back(qt, pt):
        return _matvec(Ainv, qt), _matvec(AT, pt)

    def H(qt, pt, mu):
        q, p = back(qt, pt)
        return system.H(q, p, mu)

    def dH_dq(qt, pt, mu):
        q, p = back(qt, pt)
        return _matvec(AinvT, system.dH_dq(q, p, mu))

    def dH_dp(qt, pt, mu):
        q, p = back(qt, pt)
        return _matvec(A, system.dH_dp(q, p, mu))

    separable = None
    if system.separable is not None:
        T, V = system.separable
        separable = (
            lambda pt, mu: T(_matvec(AT, pt), mu),
            lambda qt, mu: V(_matvec(Ainv, qt), mu),
        )
    new = HamiltonianSystem(
        dim_n=n,
        H=H,
        dH_dq=dH_dq,
        dH_dp=dH_dp,
        label=f"{system.label}@A",
        mu_default=system.mu_default,
        separable=separable,
    )
    if bvp is None:
        return new, None
    if not bvp.is_dirichlet:
        raise ValueError("linear transforms are only supported for Dirichlet data")
    return new, SeparatedBVP.dirichlet(new, A @ bvp.x_star, A @ bvp.X_star, bvp.tau, label=f"{bvp.label}@A")


LINEAR_TRANSFORM_A = np.array([[-1.0, 2.0], [3.0, 1.0]])

CATALOG_NAMES = (
    "bratu",
    "henon_heiles",
    "henon_heiles_perturbed",
    "planar_pitchfork",
    "cyclic_4d",
    "cyclic_4d_symbroken",
    "example5_fold",
    "torus_integrable",
    "linear_transformed",
)


def catalog_build(name: str, **params):
    """Build a catalog system by name.

    ``bratu`` needs ``C``; families with a single bifurcation parameter take
    ``mu`` (default 0); ``torus_integrable`` takes ``eps`` and ``kappa``
    (default 0.1 each).
    """
    mu = float(params.get("mu", 0.0))
    if name == "bratu":
        if "C" not in params:
            raise CatalogError("bratu requires parameter C")
        return _bratu(params["C"])
    if name == "henon_heiles":
        return _henon_heiles(False)
    if name == "henon_heiles_perturbed":
        return _henon_heiles(True)
    if name == "planar_pitchfork":
        return _planar_pitchfork(mu)
    if name == "cyclic_4d":
        return _cyclic_4d(mu, False)
    if name == "cyclic_4d_symbroken":
        return _cyclic_4d(mu, True)
    if name == "example5_fold":
        return _example5_fold(mu)
    if name == "torus_integrable":
        return build_torus_system(params.get("eps", 0.1), params.get("kappa", 0.1), mu)
    if name == "linear_transformed":
        A = params.get("A", LINEAR_TRANSFORM_A)
        return apply_linear_transform(_cyclic_4d(mu, False), None, A)[0]
    raise CatalogError(f"unknown catalog entry {name!r}")


# ---------------------------------------------------------------------------
# boundary data


def _sections(a, b, c) -> np.ndarray:
    a, b, c = np.broadcast_arrays(*(np.atleast_1d(np.asarray(v, dtype=float)) for v in (a, b, c)))
    return np.stack([a, b, c], axis=-1)


@dataclass(frozen=True)
class SeparatedBVP:
    """Separated boundary value problem on a flow (or explicit map) over time ``tau``.

    Each coordinate j carries an affine start section ``a x_j + b y_j = c`` and
    end section ``a X_j + b Y_j = c``, stored as rows of ``start``/``end``.
    Dirichlet data is ``(1, 0, x*)``, Neumann ``(0, 1, y*)`` and Robin
    ``(1, alpha, beta)``.  The free variable of coordinate j is ``y_j`` when
    ``|a| >= |b|`` and ``x_j`` otherwise.
    """

    system: HamiltonianSystem | ExplicitSymplecticMap
    tau: float
    start: np.ndarray
    end: np.ndarray
    label: str = ""

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        n = self.system.dim_n
        for arr in (self.start, self.end):
            if np.shape(arr) != (n, 3):
                raise ValueError(f"sections must have shape ({n}, 3)")
            if np.any(np.hypot(arr[:, 0], arr[:, 1]) == 0):
                raise ValueError("degenerate section a = b = 0")

    @classmethod
    def dirichlet(cls, system, x_star, X_star, tau, label=""):
        return cls(system, float(tau), _sections(1.0, 0.0, x_star), _sections(1.0, 0.0, X_star), label)

    @classmethod
    def neumann(cls, system, y_star, Y_star, tau, label=""):
        return cls(system, float(tau), _sections(0.0, 1.0, y_star), _sections(0.0, 1.0, Y_star), label)

    @classmethod
    def robin(cls, system, alpha0, beta0, alpha1, beta1, tau, label=""):
        return cls(system, float(tau), _sections(1.0, alpha0, beta0), _sections(1.0, alpha1, beta1), label)

    @property
    def n(self) -> int:
        return self.system.dim_n

    @property
    def is_dirichlet(self) -> bool:
        return bool(np.all(self.start[:, 1] == 0) and np.all(self.end[:, 1] == 0))

    @property
    def x_star(self) -> np.ndarray:
        return self.start[:, 2] / self.start[:, 0]

    @property
    def X_star(self) -> np.ndarray:
        return self.end[:, 2] / self.end[:, 0]

    def with_data(self, x_star=None, X_star=None) -> "SeparatedBVP":
        """Copy with replaced Dirichlet values."""
        start, end = self.start.copy(), self.end.copy()
        if x_star is not None:
            start[:, 2] = start[:, 0] * np.asarray(x_star, dtype=float)
        if X_star is not None:
            end[:, 2] = end[:, 0] * np.asarray(X_star, dtype=float)
        return replace(self, start=start, end=end)

    def start_point(self, s: Sequence):
        """Point (q, p) on the start section with free coordinates ``s``."""
        q, p = [], []
        for (a, b, c), sj in zip(self.start, s):
            if abs(a) >= abs(b):
                q.append((c - b * sj) / a if b else 0.0 * sj + c / a)
                p.append(sj)
            else:
                q.append(sj)
                p.append((c - a * sj) / b if a else 0.0 * sj + c / b)
        return q, p

    def free_coordinates(self, q, p) -> list:
        """Inverse of :meth:`start_point`."""
        return [pj if abs(a) >= abs(b) else qj for (a, b, _), qj, pj in zip(self.start, q, p)]

    def end_residual(self, Q, P) -> list:
        return [a * Qj + b * Pj - c for (a, b, c), Qj, Pj in zip(self.end, Q, P)]


def scenario_bvp(name: str, **params) -> SeparatedBVP:
    """The catalog system together with the boundary data used for it."""
    sys = catalog_build(name, **params) if name != "bratu" else catalog_build(name, C=params.get("C", 1.0))
    if name == "bratu":
        return SeparatedBVP.dirichlet(sys, [0.0], [0.0], 1.0, label=name)
    if name in ("henon_heiles", "henon_heiles_perturbed"):
        return SeparatedBVP.dirichlet(sys, [0.0, 0.0], [0.0, 0.0], 1.0, label=name)
    if name == "planar_pitchfork":
        return SeparatedBVP.dirichlet(sys, [0.2], [0.2], 1.7, label=name)
    if name in ("cyclic_4d", "cyclic_4d_symbroken"):
        return SeparatedBVP.dirichlet(sys, [0.2, 0.1], [0.2, 0.1], 5.0, label=name)
    if name == "example5_fold":
        return SeparatedBVP.dirichlet(sys, [0.0], [0.0], 1.0, label=name)
    if name == "torus_integrable":
        kappa = params.get("kappa", 0.1)
        pstar = [1.0 - 1.5 * kappa, 1.5]
        return SeparatedBVP.neumann(sys, pstar, pstar, 2.0 * math.pi / 3.0, label=name)
    if name == "linear_transformed":
        base = SeparatedBVP.dirichlet(_cyclic_4d(float(params.get("mu", 0.0)), False), [0.2, 0.1], [0.2, 0.1], 5.0, label="cyclic_4d")
        return apply_linear_transform(base.system, base, params.get("A", LINEAR_TRANSFORM_A))[1]
    raise CatalogError(f"unknown scenario {name!r}")


# ---------------------------------------------------------------------------
# hypersurfaces


@dataclass(frozen=True)
class Hypersurface:
    """Level set f(q) = 0 in R^n with jet-evaluable f and grad_f, hand-coded Hessian.

    ``graph`` marks surfaces of the form q_n = h(q_1..q_{n-1}).
    """

    dim_ambient: int
    f: Callable
    grad_f: Callable
    hess_f: Callable
    label: str
    q_star: np.ndarray | None = None
    graph: bool = False

    def gradient(self, q) -> np.ndarray:
        g = self.grad_f([np.asarray(q, dtype=float)[..., i] for i in range(self.dim_ambient)])
        return jt.values(g)


def _quadric(coeffs, cubic, r2, label, q_star):
    a = np.asarray(coeffs, dtype=float)
    b = np.asarray(cubic, dtype=float)
    n = len(a)

    def f(q):
        s = -r2
        for i in range(n):
            s = s + a[i] * q[i] * q[i]
            if b[i]:
                s = s + b[i] * q[i] ** 3
        return s

    def grad_f(q):
        return [2.0 * a[i] * q[i] + 3.0 * b[i] * q[i] * q[i] for i in range(n)]

    def hess_f(q):
        q = np.asarray(q, dtype=float)
        d = 2.0 * a + 6.0 * b * q
        return d[..., :, None] * np.eye(n)

    return Hypersurface(n, f, grad_f, hess_f, label, None if q_star is None else np.asarray(q_star, dtype=float))


def _gaussian_graph():
    def h(q1, q2):
        return exp(-q1 * q1 - 0.9 * q2 * q2) + 0.01 * q1**3 + 0.011 * q2**3

    def f(q):
        return h(q[0], q[1]) - q[2]

    def grad_f(q):
        g = exp(-q[0] * q[0] - 0.9 * q[1] * q[1])
        return [-2.0 * q[0] * g + 0.03 * q[0] * q[0], -1.8 * q[1] * g + 0.033 * q[1] * q[1], 0.0 * q[2] - 1.0]

    def hess_f(q):
        q = np.asarray(q, dtype=float)
        x, y = q[..., 0], q[..., 1]
        g = np.exp(-x * x - 0.9 * y * y)
        H = np.zeros(q.shape[:-1] + (3, 3))
        H[..., 0, 0] = (4.0 * x * x - 2.0) * g + 0.06 * x
        H[..., 1, 1] = (3.24 * y * y - 1.8) * g + 0.066 * y
        H[..., 0, 1] = H[..., 1, 0] = 3.6 * x * y * g
        return H

    q_star = np.array([-1.0, 0.0, float(h(-1.0, 0.0))])
    return Hypersurface(3, f, grad_f, hess_f, "gaussian_graph_perturbed", q_star, graph=True)


HYPERSURFACE_NAMES = ("plane", "sphere", "ellipsoid", "ellipsoid_perturbed", "gaussian_graph_perturbed", "ellipsoid3_perturbed")


def hypersurface_catalog(name: str) -> Hypersurface:
    inv_pi2 = 1.0 / math.pi**2
    if name == "plane":
        def f(q):
            return q[2] - 0.0

        return Hypersurface(
            3, f, lambda q: [0.0 * q[0], 0.0 * q[1], 0.0 * q[2] + 1.0],
            lambda q: np.zeros(np.shape(q)[:-1] + (3, 3)), "plane", np.zeros(3), graph=True,
        )
    if name == "sphere":
        return _quadric([1, 1, 1], [0, 0, 0], 1.0, "sphere", [1.0, 0.0, 0.0])
    if name == "ellipsoid":
        return _quadric([0.98, 0.97, 1.02], [0, 0, 0], inv_pi2, "ellipsoid", [-1.0 / (math.pi * math.sqrt(0.98)), 0.0, 0.0])
    if name == "ellipsoid_perturbed":
        return _quadric([0.98, 0.97, 1.02], [-0.1, -0.12, 0.07], inv_pi2, "ellipsoid_perturbed", [-0.316472, 0.0, 0.0])
    if name == "gaussian_graph_perturbed":
        return _gaussian_graph()
    if name == "ellipsoid3_perturbed":
        return _quadric(
            [0.98, 0.95, 1.05, 1.03], [0.5, 0.55, 0.45, 0.525], inv_pi2, "ellipsoid3_perturbed", [-0.355367, 0.0, 0.0, 0.0]
        )
    raise CatalogError(f"unknown hypersurface {name!r}")


# ---------------------------------------------------------------------------
# scenario files


@dataclass
class Scenario:
    """A catalog system plus boundary data and search windows read from a file."""

    name: str
    params: dict = field(default_factory=dict)
    kind: str = "dirichlet"
    start: list | None = None
    end: list | None = None
    tau: float | None = None
    windows: dict = field(default_factory=dict)

    def bvp(self) -> SeparatedBVP:
        base = scenario_bvp(self.name, **self.params)
        tau = base.tau if self.tau is None else self.tau
        if self.start is None and self.end is None and self.tau is None:
            return base
        sys = base.system
        if self.kind == "dirichlet":
            return SeparatedBVP.dirichlet(
                sys, self.start if self.start is not None else base.x_star,
                self.end if self.end is not None else base.X_star, tau, label=self.name,
            )
        if self.kind == "neumann":
            return SeparatedBVP.neumann(sys, self.start, self.end, tau, label=self.name)
        raise ValueError(f"unsupported boundary kind {self.kind!r}")


def _floats(text: str) -> list:
    return [float(t) for t in text.replace(",", " ").split()]


def load_scenario(path) -> Scenario:
    """Read a scenario file (INI syntax, case-sensitive keys).

    ``[scenario]`` holds ``system``, optional ``kind`` (dirichlet/neumann),
    ``start``, ``end`` (space separated), ``tau``; ``[params]`` holds catalog
    parameters; ``[windows]`` holds search windows as ``lo hi [count]``.
    """
    cp = configparser.ConfigParser()
    cp.optionxform = str
    with open(Path(path)) as fh:
        cp.read_file(fh)
    sec = cp["scenario"]
    sc = Scenario(name=sec["system"], kind=sec.get("kind", "dirichlet"))
    if "start" in sec:
        sc.start = _floats(sec["start"])
    if "end" in sec:
        sc.end = _floats(sec["end"])
    if "tau" in sec:
        sc.tau = float(sec["tau"])
    if cp.has_section("params"):
        sc.params = {k: float(v) for k, v in cp["params"].items()}
    if cp.has_section("windows"):
        sc.windows = {k: _floats(v) for k, v in cp["windows"].items()}
    if sc.name not in CATALOG_NAMES:
        raise CatalogError(f"unknown catalog entry {sc.name!r}")
    return sc
