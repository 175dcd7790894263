import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hambif import jets as jt
from hambif import systems as S
from hambif.integrate import FlowSpec, flow

from conftest import central_fd

small = st.floats(-0.8, 0.8, allow_nan=False)


def H_at(sys, q, p, mu=None):
    return float(sys.energy(q, p, mu))


def test_bratu_energy():
    assert H_at(S.catalog_build("bratu", C=3), [0.0], [1.5]) == pytest.approx(4.125, abs=1e-15)


def test_planar_pitchfork_energy():
    assert H_at(S.catalog_build("planar_pitchfork", mu=0.0), [1.0], [0.0]) == pytest.approx(0.98, abs=1e-15)


def test_example5_fold_solutions():
    phi = S.catalog_build("example5_fold", mu=-0.03)
    for y in (0.1, -0.1):
        (X,), _ = phi([0.0], [y])
        assert abs(X) < 1e-15


def test_catalog_errors():
    with pytest.raises(S.CatalogError):
        S.catalog_build("nope")
    with pytest.raises(S.CatalogError):
        S.catalog_build("bratu")
    with pytest.raises(S.CatalogError):
        S.hypersurface_catalog("torus")


@pytest.mark.parametrize("name", [n for n in S.CATALOG_NAMES if n not in ("example5_fold",)])
def test_separable_split_and_analytic_gradients(name, rng):
    sys = S.catalog_build(name, C=1.0) if name == "bratu" else S.catalog_build(name, mu=-0.5)
    n = sys.dim_n
    for _ in range(20):
        z = rng.uniform(-0.7, 0.7, size=2 * n)
        q, p = list(z[:n]), list(z[n:])
        mu = sys.mu()
        if sys.separable is not None:
            T, V = sys.separable
            assert abs(sys.H(q, p, mu) - (T(p, mu) + V(q, mu))) < 1e-12
        g = sys.gradient_from_jets(z)
        hand = np.array([*sys.dH_dq(q, p, mu), *sys.dH_dp(q, p, mu)], dtype=float)
        assert np.allclose(g, hand, atol=1e-10)


def test_torus_example_values():
    sys = S.build_torus_system(0.1, 0.1, 0.0)
    q, p = [math.pi / 2, 0.0], [1.0 - 0.15, 1.5]
    assert H_at(sys, q, p) == pytest.approx(3.25, abs=1e-12)
    pb1, pb2 = S.torus_integrals(0.1, 0.1, q, p)
    assert (pb1, pb2) == pytest.approx((1.0, 1.5), abs=1e-12)
    (mu,) = jt.lift([0.0])
    dmu = sys.H(q, p, [mu])
    assert dmu.partials[0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("eps,kappa", [(0.0, 0.1), (1.0, 0.1), (0.1, -1.5)])
def test_torus_rejects_bad_parameters(eps, kappa):
    with pytest.raises(ValueError):
        S.build_torus_system(eps, kappa)


def test_torus_integrals_conserved_on_reference_flow():
    sys = S.build_torus_system(0.1, 0.1, 0.0)
    z0 = np.array([math.pi / 2, 0.0, 0.85, 1.5])
    spec = FlowSpec("ref_rk4", 4000, 2 * math.pi / 3, keep_trajectory=True)
    traj = flow(sys, z0, None, spec).trajectory
    pb = np.array(S.torus_integrals(0.1, 0.1, [traj[:, 0], traj[:, 1]], [traj[:, 2], traj[:, 3]])[:2])
    assert np.max(np.abs(pb - pb[:, :1])) < 1e-8


def test_torus_energy_second_order():
    sys = S.build_torus_system(0.1, 0.1, 0.0)
    z0 = np.array([math.pi / 2, 0.0, 0.85, 1.5])
    H0 = H_at(sys, z0[:2], z0[2:])
    errs = []
    for N in (40, 80):
        z = flow(sys, z0, None, FlowSpec("sv", N, 2 * math.pi / 3)).z_final
        errs.append(abs(H_at(sys, z[:2], z[2:]) - H0))
    assert errs[1] < errs[0] and errs[0] / errs[1] > 2.5


def test_example5_map_symplectic(rng):
    phi = S.catalog_build("example5_fold", mu=0.3)
    z = rng.uniform(-1, 1, size=(100, 2))
    M = jt.jacobian(lambda e: [*phi([e[0]], [e[1]])[0], *phi([e[0]], [e[1]])[1]], z)
    assert S.symplectic_residual(M) < 1e-12


def test_linear_transform_identity_and_invariance(rng):
    base = S.catalog_build("cyclic_4d", mu=-0.8)
    same, _ = S.apply_linear_transform(base, None, np.eye(2))
    A = S.LINEAR_TRANSFORM_A
    new, bvp = S.apply_linear_transform(base, S.scenario_bvp("cyclic_4d", mu=-0.8), A)
    for _ in range(10):
        z = rng.uniform(-0.5, 0.5, size=4)
        h = H_at(base, z[:2], z[2:])
        assert H_at(same, z[:2], z[2:]) == h
        qt, pt = A @ z[:2], np.linalg.solve(A.T, z[2:])
        assert H_at(new, qt, pt) == pytest.approx(h, abs=1e-12)
    assert np.allclose(bvp.x_star, A @ [0.2, 0.1]) and np.allclose(bvp.X_star, A @ [0.2, 0.1])
    M = np.block([[A, np.zeros((2, 2))], [np.zeros((2, 2)), np.linalg.inv(A).T]])
    assert S.symplectic_residual(M) < 1e-15
    with pytest.raises(ValueError):
        S.apply_linear_transform(base, None, np.ones((2, 2)))


def test_hypersurface_reference_points():
    sph = S.hypersurface_catalog("sphere")
    assert float(sph.f([1.0, 0.0, 0.0])) == 0.0
    assert sph.gradient([1.0, 0.0, 0.0]).tolist() == [2.0, 0.0, 0.0]
    E = S.hypersurface_catalog("ellipsoid_perturbed")
    assert abs(float(E.f(list(E.q_star)))) < 1e-4
    for name in S.HYPERSURFACE_NAMES:
        surf = S.hypersurface_catalog(name)
        if surf.q_star is not None:
            assert abs(float(surf.f(list(surf.q_star)))) < 1e-4
            assert np.linalg.norm(surf.gradient(surf.q_star)) > 0.1


@pytest.mark.parametrize("name", S.HYPERSURFACE_NAMES)
def test_hypersurface_derivatives_match_jets(name, rng):
    surf = S.hypersurface_catalog(name)
    d = surf.dim_ambient
    q = rng.uniform(-0.6, 0.6, size=(50, d))
    g_jet = jt.jacobian(lambda e: [surf.f(e)], q)[:, 0, :]
    assert np.allclose(g_jet, surf.gradient(q), atol=1e-10)
    H_jet = jt.jacobian(lambda e: surf.grad_f(e), q)
    H = surf.hess_f(q)
    assert np.allclose(H_jet, H, atol=1e-10)
    assert np.max(np.abs(H - np.swapaxes(H, -1, -2))) < 1e-12


def test_bvp_sections():
    sys = S.catalog_build("planar_pitchfork")
    b = S.SeparatedBVP.robin(sys, 0.5, 1.0, 2.0, -1.0, 1.0)
    q, p = b.start_point([0.3])
    assert q[0] + 0.5 * p[0] == pytest.approx(1.0)
    assert b.free_coordinates(q, p) == [0.3]
    assert b.end_residual([-1.0], [0.0]) == [0.0]
    assert b.end_residual([1.0], [1.0]) == [4.0]
    with pytest.raises(ValueError):
        S.SeparatedBVP.dirichlet(sys, [0.0], [0.0], 0.0)
    with pytest.raises(ValueError):
        S.SeparatedBVP(sys, 1.0, np.array([[0.0, 0.0, 1.0]]), np.array([[1.0, 0.0, 0.0]]))


def test_load_scenario_roundtrip(tmp_path):
    f = tmp_path / "s.ini"
    f.write_text("[scenario]\nsystem = planar_pitchfork\nstart = 0.2\nend = 0.2\ntau = 1.7\n"
                 "[params]\nmu = -6\n[windows]\nmu = -8 -5.5 51\n")
    sc = S.load_scenario(f)
    assert sc.params == {"mu": -6.0} and sc.windows["mu"] == [-8.0, -5.5, 51.0]
    b = sc.bvp()
    assert b.tau == 1.7 and b.x_star.tolist() == [0.2]
    f.write_text("[scenario]\nsystem = nothing\n")
    with pytest.raises(S.CatalogError):
        S.load_scenario(f)


@settings(max_examples=40, deadline=None)
@given(small, small, small, small)
def test_torus_gradient_property(a, b, c, d):
    sys = S.build_torus_system(0.1, 0.1, 0.2)
    z = np.array([a, b, c, d])
    hand = np.array([*sys.dH_dq(list(z[:2]), list(z[2:]), sys.mu()), *sys.dH_dp(list(z[:2]), list(z[2:]), sys.mu())], float)
    fd = central_fd(lambda v: np.array([H_at(sys, v[:2], v[2:])]), z)[0]
    assert np.allclose(hand, fd, rtol=1e-6, atol=1e-7)
