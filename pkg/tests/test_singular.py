import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import cKDTree

from hambif import bvp as B
from hambif import singular as G
from hambif import systems as S
from hambif.integrate import FlowSpec

SV10 = FlowSpec("sv", 10, 1.0)


def test_corank_trivial():
    assert G.corank(np.zeros((2, 2))) == 2
    assert G.corank(np.diag([1.0, 0.0])) == 1
    assert G.corank(np.eye(3)) == 0
    assert G.corank(np.stack([np.eye(2), np.diag([1.0, 0.0])])).tolist() == [0, 1]
    with pytest.raises(ValueError):
        G.corank(np.eye(2), tol=1.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(0, 2))
def test_corank_invariant_under_conditioning(seed, k):
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    V, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    s = np.array([1.0, 0.5, 0.2])
    s[3 - k:] = 0.0
    M = U @ np.diag(s) @ V.T

    def conditioned():
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        return Q @ np.diag([1.0, 10 ** rng.uniform(0, 1.5), 10 ** rng.uniform(0, 1.5)]) @ Q.T

    assert G.corank(M) == k
    assert G.corank(conditioned() @ M @ conditioned()) == k


def test_locate_umbilic_henon_heiles():
    hh = S.scenario_bvp("henon_heiles")
    seed, _ = G.umbilic_seed_scan(hh, SV10, [[1.0, 1.8], [-0.4, 0.4], [1.6, 2.4]], shape=(9, 9, 9))
    pt = G.locate_umbilic(hh, SV10, seed)
    assert pt.converged and pt.residual_norm < 1e-8
    assert pt.corank == 2 and pt.class_hint == "D4_candidate"
    assert np.linalg.norm(pt.jac) < 1e-8


def test_locate_umbilic_requires_two_dimensions():
    with pytest.raises(ValueError):
        G.locate_umbilic(S.scenario_bvp("example5_fold"), None, [0.0, 0.0, 0.0])


def test_example5_level_set_is_diagonal():
    b = S.scenario_bvp("example5_fold")
    L = G.level_bifurcation_set(b, None, [[-0.1, 0.1], [-0.2, 0.2]], shape=21, free_params=(0,))
    assert len(L.vertices) > 5
    assert np.max(np.abs(L.chart_vertices[:, 1])) < 1e-12
    assert np.allclose(L.vertices[:, 0], L.vertices[:, 1], atol=1e-12)
    assert np.max(np.abs(L.det_at_vertices)) < 1e-12


def test_level_set_empty_without_sign_change():
    b = S.scenario_bvp("example5_fold")
    L = G.level_bifurcation_set(b, None, [[-0.1, 0.1], [0.1, 0.2]], shape=11, free_params=(0,))
    assert len(L) == 0 and "sign change" in L.empty_reason


def test_level_set_box_dimension_checked():
    with pytest.raises(ValueError):
        G.level_bifurcation_set(S.scenario_bvp("henon_heiles"), SV10, [[0, 1], [0, 1]], shape=5)


def test_level_set_grid_convergence():
    hh = S.scenario_bvp("henon_heiles")
    box = [[-3.0, 3.0], [-3.0, 3.0]]
    coarse = G.level_bifurcation_set(hh, SV10, box, shape=41, free_x=())
    fine = G.level_bifurcation_set(hh, SV10, box, shape=81, free_x=())
    cell = np.hypot(6.0 / 40, 6.0 / 40)
    dist, _ = cKDTree(coarse.chart_vertices).query(fine.chart_vertices)
    assert np.max(dist) < cell


def test_level_set_vertices_refined():
    hh = S.scenario_bvp("henon_heiles")
    L = G.level_bifurcation_set(hh, SV10, [[-3.0, 3.0], [-3.0, 3.0]], shape=81, free_x=())
    D = L.jac_at_vertices
    raw = np.abs(np.linalg.det(D))
    assert np.allclose(raw, np.abs(L.det_at_vertices))
    # after refinement the determinant is small relative to the typical field scale
    assert np.median(raw) < 1e-3 * np.median(np.abs(np.linalg.norm(D, axis=(1, 2)) ** 2))


def test_classify_example5_fold_is_A2():
    pt = G.SingularPoint(np.array([0.0]), np.zeros((1, 1)), 1, mu=np.array([0.0]))
    kind, info = G.classify_A(pt, S.scenario_bvp("example5_fold"), None)
    assert kind == "A2" and abs(abs(info["c2"]) - 6.0) < 1e-8


def test_classify_cusp_model_is_A3():
    pt = G.SingularPoint(np.array([0.0]), np.zeros((1, 1)), 1)
    kind, info = G.classify_A(pt, fun=lambda y: [4.0 * y[0] ** 3])
    assert kind == "A3" and abs(info["c2"]) < 1e-12 and abs(abs(info["c3"]) - 24.0) < 1e-6


def test_classify_bratu_fold_is_A2():
    b = S.SeparatedBVP.dirichlet(S.catalog_build("bratu", C=1.0), [0.0], [0.0], 1.0)
    spec = FlowSpec("sv", 20, 1.0)
    seed = B.shoot(b, spec, [1.0], [0.5])
    (fold,) = B.continue_branch(b, spec, seed, ds=5e-2, mu_bounds=(0, 4), y_bounds=20.0).folds()
    _, J = B.residual_jacobian(b, spec, fold.y, fold.mu)
    pt = G.SingularPoint(fold.y, J, 1, mu=fold.mu)
    kind, info = G.classify_A(pt, b, spec)
    assert kind == "A2" and abs(info["c2"]) > 1e-2
    with pytest.raises(ValueError):
        G.classify_A(G.SingularPoint(fold.y, J, 0, mu=fold.mu), b, spec)
