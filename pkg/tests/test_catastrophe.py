import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hambif import catastrophe as C
from hambif import jets as jt

from conftest import central_fd

coord = st.floats(-1.5, 1.5, allow_nan=False)


def test_table_examples():
    _, g, _ = C.unfolding_eval("A2", [0.0], [1.0])
    assert g.tolist() == [3.0]
    v, g, H = C.unfolding_eval("D4minus", [0.0, 0.0, 0.0], [0.0, 0.0])
    assert v == 0.0 and g.tolist() == [0.0, 0.0] and np.array_equal(H, np.zeros((2, 2)))


def test_arity_and_kind_errors():
    with pytest.raises(ValueError):
        C.unfolding_eval("A3", [0.0, 0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        C.unfolding_eval("E6", [0.0], [0.0])
    with pytest.raises(ValueError):
        C.Unfolding("A3").value([0.0], [1.0])
    assert C.Unfolding("plus").kind == "D4plus"


@pytest.mark.parametrize("kind", C.KINDS)
def test_grad_hess_match_jets(kind, rng):
    U = C.Unfolding(kind)
    for _ in range(20):
        pt = rng.uniform(-1, 1, size=U.arity)
        mu = rng.uniform(-1, 1, size=U.n_params)
        g = jt.jacobian(lambda e: [U.value(e, mu)], pt)[0]
        H = jt.jacobian(lambda e: U.gradient_entries(e, mu), pt)
        assert np.allclose(U.grad(pt, mu), g, atol=1e-12)
        assert np.allclose(U.hess(pt, mu), H, atol=1e-12)


def test_d4plus_hessian_determinant_vs_fd(rng):
    U = C.Unfolding("D4plus")
    for _ in range(50):
        pt = rng.uniform(-1, 1, size=2)
        mu = rng.uniform(-1, 1, size=3)
        fd = central_fd(lambda p: U.grad(p, mu), pt, step=1e-5)
        assert abs(np.linalg.det(U.hess(pt, mu)) - np.linalg.det(fd)) < 1e-8


@settings(max_examples=100, deadline=None)
@given(coord, coord, coord, coord, coord, st.sampled_from(["D4plus", "D4minus"]))
def test_vector_unfolding_is_gradient_at_mu4_zero(x, y, m1, m2, m3, kind):
    vf = C.VectorUnfolding.d4(kind)
    mu = [m1, m2, m3, 0.0]
    g = jt.jacobian(lambda e: [vf.potential(e[0], e[1], mu)], [x, y])[0]
    assert np.allclose(vf([x, y], mu), g, atol=1e-14)
    # and, with coordinates swapped, the tabulated unfolding
    U = C.Unfolding(kind)
    assert np.allclose(vf([x, y], mu)[::-1], U.grad([y, x], [m2, m1, m3]), atol=1e-14)


@settings(max_examples=100, deadline=None)
@given(coord, coord, coord, coord, st.sampled_from([1, -1]))
def test_conic_determinant_formula(x, y, m3, m4, s):
    vf = C.VectorUnfolding(s, 2)
    mu = [0.3, -0.2, m3, m4]
    J = jt.jacobian(lambda e: vf.entries(e[0], e[1], mu), [x, y])
    assert np.allclose(vf.jacobian([x, y], mu), J, atol=1e-14)
    printed = -4 * (x + s * m4 / 4) ** 2 + 12 * s * (y - m3 / 3) ** 2 + m4**2 / 4 - 16 / 3 * s * m3**2
    direct = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    assert abs(direct - printed) < 1e-12


def test_second_derivatives_match_jets(rng):
    for vf in (C.VectorUnfolding(1, 2), C.VectorUnfolding(-1, 2), C.VectorUnfolding(1, 4)):
        mu = rng.uniform(-1, 1, size=vf.n_params)
        pt = rng.uniform(-1, 1, size=2)
        T = vf.second_derivatives(pt, mu)
        fd = central_fd(lambda p: vf.jacobian(p, mu), pt, step=1e-5)
        assert np.allclose(T, fd, atol=1e-8)


def test_higher_k_unfolding():
    vf = C.VectorUnfolding(-1, 3)
    assert vf.n_params == 5
    mu = [0.1, 0.2, 0.3, 0.0, 0.4]
    g = jt.jacobian(lambda e: [vf.potential(e[0], e[1], mu)], [0.7, -0.4])[0]
    assert np.allclose(vf([0.7, -0.4], mu), g, atol=1e-14)
    with pytest.raises(ValueError):
        C.VectorUnfolding(2, 2)
    with pytest.raises(ValueError):
        C.VectorUnfolding(1, 1)


def test_d4minus_unperturbed_single_singular_point():
    ls = C.d4_level_set("minus", [0.0], 0.0, grid=64)
    pts = ls.points()
    assert len(pts) >= 1
    assert np.allclose(pts[:, [0, 1, 3, 4]], 0.0, atol=1e-12)
    row, nrm = ls.vertex()
    assert nrm < 1e-12 and np.allclose(row[:3], 0.0, atol=1e-12)


def test_d4minus_perturbed_has_no_corank_two_point(rng):
    for _ in range(10):
        m3 = rng.uniform(-1, 1)
        m4 = rng.choice([-1, 1]) * rng.uniform(0.05, 1)
        val, _ = C.min_jacobian_norm("minus", m3, m4)
        assert val > 0
        # the algebraic reason: df1/dy and df2/dx cannot vanish together
        assert val >= abs(m4) / 2 * 0.99 / np.sqrt(2) or val > 1e-3


def test_d4minus_origin_when_mu4_zero():
    val, xy = C.min_jacobian_norm("minus", 0.0, 0.0)
    assert val == 0.0 and xy == (0.0, 0.0)


def test_level_set_points_solve_the_problem():
    vf = C.VectorUnfolding.d4("plus")
    ls = C.d4_level_set("plus", np.linspace(-0.3, 0.3, 7), 0.1, grid=64)
    P = ls.points()
    assert len(P) > 100
    for r in P[::17]:
        mu = [r[0], r[1], r[2], 0.1]
        assert np.max(np.abs(vf(r[3:5], mu))) < 1e-12
        assert abs(vf.det(r[3:5], mu)) < 1e-10


@pytest.mark.parametrize("kind,count", [("plus", 1), ("minus", 3)])
def test_level_set_cusps_have_tangent_kernel(kind, count):
    # slices through the umbilic: one cusp (hyperbolic) or a three-cusped deltoid (elliptic)
    vf = C.VectorUnfolding.d4(kind)
    ls = C.d4_level_set(kind, [0.2], 0.0, grid=256)
    cusps = ls.cusps()
    assert len(cusps) == count
    for r in cusps:
        mu = [r[0], r[1], r[2], 0.0]
        J = vf.jacobian(r[3:5], mu)
        k = np.linalg.svd(J)[2][-1]
        gdet = central_fd(lambda p: np.array([vf.det(p, mu)]), r[3:5])[0]
        assert abs(gdet @ k) < 1e-6 * np.linalg.norm(gdet)


def test_d4plus_vertex_splits_under_perturbation():
    m3 = np.round(np.linspace(-0.3, 0.3, 61), 12)
    exact = C.d4_level_set("plus", m3, 0.0, grid=128)
    pert = C.d4_level_set("plus", m3, 0.1, grid=128)
    _, n0 = exact.vertex()
    _, n1 = pert.vertex()
    assert n0 < 1e-12 and n1 > 0.05


def test_level_set_grid_validation_and_workers():
    with pytest.raises(ValueError):
        C.d4_level_set("plus", [0.0], 0.1, grid=16)
    a = C.d4_level_set("plus", [-0.1, 0.0, 0.1], 0.1, grid=64)
    b = C.d4_level_set("plus", [-0.1, 0.0, 0.1], 0.1, grid=64, workers=3)
    assert np.array_equal(a.points(), b.points())


def test_swallowtail_closed_form():
    pts = C.swallowtail_points(0.24)
    xy = sorted(p.xy for p in pts)
    assert xy[0] == pytest.approx((-0.06, -0.0173205), abs=1e-7)
    assert xy[1] == pytest.approx((-0.06, 0.0173205), abs=1e-7)
    assert sorted(p.mu3 for p in pts) == pytest.approx([-0.0519615, 0.0519615], abs=1e-7)
    (origin,) = C.swallowtail_points(0.0)
    assert origin.xy == (0.0, 0.0) and origin.mu == (0.0, 0.0, 0.0)


def test_swallowtail_points_are_degenerate_cusps():
    vf = C.VectorUnfolding(1, 2)
    for p in C.swallowtail_points(0.1):
        mu = [*p.mu12, p.mu3, 0.1]
        assert np.max(np.abs(vf(p.xy, mu))) < 1e-14
        assert abs(vf.det(p.xy, mu)) < 1e-14


@pytest.mark.parametrize("mu4", [0.1, 0.24])
def test_traced_swallowtails_match_closed_form(mu4):
    traced = C.trace_swallowtails(mu4, n_slices=81, grid=256)
    ref = C.swallowtail_points(mu4)
    assert len(traced) == 2
    for r in ref:
        d = min(np.linalg.norm(np.array([*t.xy, t.mu3]) - [*r.xy, r.mu3]) for t in traced)
        assert d < 1e-4
