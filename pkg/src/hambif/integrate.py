"""One-step methods and N-step flow maps with optional jet propagation.

States are pairs of entry lists ``(q, p)``; entries may be floats, arrays
(batches of trajectories) or jets.  Jets flow through every method, including
the implicit Stoermer-Verlet step where derivatives of the inner solution are
recovered by the implicit function theorem.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import jets as jt
from .jets import Jet
from .systems import ExplicitSymplecticMap, HamiltonianSystem

__all__ = [
    "METHODS",
    "FlowSpec",
    "FlowResult",
    "StepFailure",
    "FlowError",
    "step_sv_separable",
    "step_sv_general",
    "step_rk2",
    "step_rk4",
    "flow",
    "flow_entries",
    "propagate",
]

METHODS = ("sv", "sv_implicit", "rk2", "ref_rk4")


class StepFailure(RuntimeError):
    """Inner Newton iteration of an implicit step did not converge."""


class FlowError(RuntimeError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"flow aborted at step {step}: {cause}")
        self.step = step
        self.cause = cause


@dataclass(frozen=True)
class FlowSpec:
    method: str = "sv"
    steps: int = 10
    tau: float = 1.0
    with_jets: bool = False
    keep_trajectory: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if not np.isfinite(self.tau) or self.tau == 0:
            raise ValueError("tau must be finite and nonzero")

    @property
    def h(self) -> float:
        return self.tau / self.steps


@dataclass
class FlowResult:
    z_final: np.ndarray
    jac: np.ndarray | None = None
    trajectory: np.ndarray | None = None


# ---------------------------------------------------------------------------
# helpers


def _axpy(a, x, y):
    # y + a*x entrywise
    return [yi + a * xi for xi, yi in zip(x, y)]


def _strip(entries):
    return [jt.value_of(e) for e in entries]


def _has_jets(*groups) -> bool:
    return any(isinstance(e, Jet) for g in groups for e in g)


def _solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched solve of A x = b where b has one fewer axis (or a trailing seed axis)."""
    if b.ndim == A.ndim - 1:
        return np.linalg.solve(A, b[..., None])[..., 0]
    return np.linalg.solve(A, b)


def _implicit_solve(G: Callable, guess, ctx, tol: float, maxiter: int):
    """Solve G(x, ctx) = 0 for x; recover jet partials of x from those of ctx.

    ``G`` maps (x entries, ctx entry-groups) to a residual list.  Newton runs on
    plain values with jet Jacobians in x; afterwards the partials of x follow
    from dx = -(D_x G)^{-1} (D_ctx G . dctx).
    """
    ctx_vals = [_strip(g) for g in ctx]
    x = jt.values(guess)
    n = x.shape[-1]
    for _ in range(maxiter):
        r = G(jt.lift(x), ctx_vals)
        F = jt.values(r)
        Jx = jt.tangents(r, n)
        dx = -_solve(Jx, F)
        x = x + dx
        if np.max(np.abs(dx)) <= tol * (1.0 + np.max(np.abs(x))):
            break
    else:
        raise StepFailure(
            f"implicit stage did not converge in {maxiter} iterations (last |dx| = {np.max(np.abs(dx)):.3e})"
        )
    if not _has_jets(*ctx):
        return [x[..., i] for i in range(n)]
    m = next(e.nseeds for g in ctx for e in g if isinstance(e, Jet))
    xs = [x[..., i] for i in range(n)]
    r_ctx = G(xs, ctx)
    R = jt.tangents(r_ctx, m)
    Jx = jt.tangents(G(jt.lift(x), ctx_vals), n)
    shape = np.broadcast_shapes(Jx.shape[:-2], R.shape[:-2])
    dX = -np.linalg.solve(np.broadcast_to(Jx, shape + Jx.shape[-2:]), np.broadcast_to(R, shape + R.shape[-2:]))
    return jt.seed(np.broadcast_to(x, shape + (n,)), dX)


# ---------------------------------------------------------------------------
# one-step maps


def step_sv_separable(system: HamiltonianSystem, q, p, mu, h: float):
    """Momentum-first Stoermer-Verlet (kick-drift-kick) for H = T(p) + V(q)."""
    if system.separable is None:
        raise ValueError(f"{system.label} is not separable")
    p_half = _axpy(-0.5 * h, system.dH_dq(q, p, mu), p)
    q_new = _axpy(h, system.dH_dp(q, p_half, mu), q)
    p_new = _axpy(-0.5 * h, system.dH_dq(q_new, p_half, mu), p_half)
    return q_new, p_new


def step_sv_general(system: HamiltonianSystem, q, p, mu, h: float, tol: float = 1e-12, maxiter: int = 50):
    """Implicit partitioned Stoermer-Verlet for non-separable H (Newton inner solves)."""
    q, p = list(q), list(p)

    def G_half(P, ctx):
        qc, pc, muc = ctx
        g = system.dH_dq(qc, P, muc)
        return [Pi - pi + 0.5 * h * gi for Pi, pi, gi in zip(P, pc, g)]

    # explicit Euler predictors
    qv, pv, muv = _strip(q), _strip(p), _strip(mu)
    guess = _axpy(-0.5 * h, system.dH_dq(qv, pv, muv), pv)
    p_half = _implicit_solve(G_half, guess, (q, p, list(mu)), tol, maxiter)

    def G_drift(Qn, ctx):
        qc, ph, muc = ctx
        a = system.dH_dp(qc, ph, muc)
        b = system.dH_dp(Qn, ph, muc)
        return [Qi - qi - 0.5 * h * (ai + bi) for Qi, qi, ai, bi in zip(Qn, qc, a, b)]

    guess = _axpy(h, system.dH_dp(qv, _strip(p_half), muv), qv)
    q_new = _implicit_solve(G_drift, guess, (q, p_half, list(mu)), tol, maxiter)
    p_new = _axpy(-0.5 * h, system.dH_dq(q_new, p_half, mu), p_half)
    return q_new, p_new


def _field(system, q, p, mu):
    return system.vector_field(q, p, mu)


def step_rk2(system: HamiltonianSystem, q, p, mu, h: float):
    """Explicit midpoint rule: z' = z + h X(z + h/2 X(z))."""
    kq, kp = _field(system, q, p, mu)
    qm, pm = _axpy(0.5 * h, kq, q), _axpy(0.5 * h, kp, p)
    kq, kp = _field(system, qm, pm, mu)
    return _axpy(h, kq, q), _axpy(h, kp, p)


def step_rk4(system: HamiltonianSystem, q, p, mu, h: float):
    k1q, k1p = _field(system, q, p, mu)
    k2q, k2p = _field(system, _axpy(0.5 * h, k1q, q), _axpy(0.5 * h, k1p, p), mu)
    k3q, k3p = _field(system, _axpy(0.5 * h, k2q, q), _axpy(0.5 * h, k2p, p), mu)
    k4q, k4p = _field(system, _axpy(h, k3q, q), _axpy(h, k3p, p), mu)
    qn = [qi + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d) for qi, a, b, c, d in zip(q, k1q, k2q, k3q, k4q)]
    pn = [pi + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d) for pi, a, b, c, d in zip(p, k1p, k2p, k3p, k4p)]
    return qn, pn


def _stepper(system: HamiltonianSystem, method: str):
    if method == "sv":
        return step_sv_separable if system.separable is not None else step_sv_general
    if method == "sv_implicit":
        return step_sv_general
    if method == "rk2":
        return step_rk2
    if method == "ref_rk4":
        return step_rk4
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# flows


def flow_entries(system: HamiltonianSystem, q, p, mu, spec: FlowSpec, trajectory: list | None = None):
    """Compose ``spec.steps`` steps of size tau/N on entry lists (jets pass through)."""
    step = _stepper(system, spec.method)
    h = spec.h
    mu = system.mu(mu)
    q, p = list(q), list(p)
    for k in range(spec.steps):
        try:
            q, p = step(system, q, p, mu, h)
        except (StepFailure, FloatingPointError, np.linalg.LinAlgError) as exc:
            raise FlowError(k, exc) from exc
        if trajectory is not None:
            trajectory.append(np.concatenate([jt.values(q), jt.values(p)], axis=-1))
    return q, p


def propagate(system, q, p, mu, spec: FlowSpec | None):
    """Apply either an explicit symplectic map or the discrete flow of a Hamiltonian."""
    if isinstance(system, ExplicitSymplecticMap):
        return system(q, p, mu)
    return flow_entries(system, q, p, mu, spec)


def flow(system: HamiltonianSystem, z0, mu, spec: FlowSpec) -> FlowResult:
    """Numerical time-tau map applied to ``z0`` (shape (2n,) or (..., 2n)).

    With ``spec.with_jets`` the 2n x 2n Jacobian of the map is propagated in the
    same pass by seeding ``z0`` with the identity.
    """
    z0 = np.asarray(z0, dtype=float)
    n = system.dim_n
    if z0.shape[-1] != 2 * n:
        raise ValueError(f"expected state of length {2 * n}")
    entries = jt.lift(z0) if spec.with_jets else [z0[..., i] for i in range(2 * n)]
    traj = [z0.copy()] if spec.keep_trajectory else None
    Q, P = flow_entries(system, entries[:n], entries[n:], mu, spec, traj)
    out = Q + P
    z = jt.values(out)
    z = np.broadcast_to(z, z0.shape).copy() if z.shape != z0.shape else z
    jac = None
    if spec.with_jets:
        jac = jt.tangents(out, 2 * n)
        jac = np.broadcast_to(jac, z0.shape[:-1] + (2 * n, 2 * n)).copy()
    return FlowResult(z, jac, None if traj is None else np.stack(traj, axis=-2))
