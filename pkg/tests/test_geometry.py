import numpy as np
import pytest

from conformal_points import geometry as geo
from conformal_points import surfaces
from conformal_points.errors import DegenerateMetric

I2 = np.eye(2)


def random_spd(rng):
    a = rng.normal(size=(2, 2))
    return a @ a.T + 0.3 * I2


def test_endo_of_tensor_examples():
    np.testing.assert_allclose(geo.endo_of_tensor(I2, I2), I2, atol=1e-15)
    H = geo.endo_of_tensor(2 * I2, np.diag([2.0, 4.0]))
    np.testing.assert_allclose(H, np.diag([1.0, 2.0]), atol=1e-14)
    H = geo.endo_of_tensor(np.diag([1.0, 4.0]), np.array([[0.0, 2.0], [2.0, 0.0]]))
    np.testing.assert_allclose(H, np.array([[0.0, 2.0], [0.5, 0.0]]), atol=1e-14)


def test_endo_of_tensor_gh_equals_a():
    rng = np.random.default_rng(0)
    for _ in range(20):
        G = random_spd(rng)
        s = rng.normal(size=(2, 2))
        A = s + s.T
        H = geo.endo_of_tensor(G, A)
        np.testing.assert_allclose(G @ H, A, atol=1e-12)
        # defining identity g(u, Hv) = h(u, v) on random vectors
        for _ in range(20):
            u = rng.normal(size=2)
            v = rng.normal(size=2)
            assert u @ G @ (H @ v) == pytest.approx(u @ A @ v, abs=1e-10)


def test_endo_of_tensor_degenerate():
    with pytest.raises(DegenerateMetric):
        geo.endo_of_tensor(np.diag([1.0, 0.0]), I2)


def test_trace_free():
    np.testing.assert_allclose(geo.trace_free(I2), np.zeros((2, 2)))
    out = geo.trace_free(np.array([[2.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(out, np.array([[1.0, 1.0], [1.0, -1.0]]))
    tf = np.array([[3.0, -2.0], [5.0, -3.0]])
    np.testing.assert_allclose(geo.trace_free(tf), tf)


def test_orthonormal_frame_examples():
    e1, e2 = geo.orthonormal_frame(I2)
    np.testing.assert_allclose(e1, [1.0, 0.0])
    np.testing.assert_allclose(e2, [0.0, 1.0])
    e1, e2 = geo.orthonormal_frame(np.diag([4.0, 1.0]))
    np.testing.assert_allclose(e1, [0.5, 0.0])
    np.testing.assert_allclose(e2, [0.0, 1.0])
    _, e2 = geo.orthonormal_frame(np.diag([1.0, 9.0]))
    np.testing.assert_allclose(e2, [0.0, 1.0 / 3.0])


@pytest.mark.parametrize("start", ["u", "v"])
def test_orthonormal_frame_random(start):
    rng = np.random.default_rng(1)
    for _ in range(30):
        G = random_spd(rng)
        E = geo.frame_matrix(G, start=start)
        gram = E.T @ G @ E
        np.testing.assert_allclose(gram, I2, atol=1e-12)
        assert np.linalg.det(E) > 0


def test_ea_components_examples():
    E = geo.frame_matrix(I2)
    assert geo.ea_components(np.diag([1.0, -1.0]), E) == pytest.approx(1.0)
    assert geo.ea_components(np.array([[0.0, 1.0], [1.0, 0.0]]), E) == \
        pytest.approx(1j)
    assert geo.ea_components(np.zeros((2, 2)), E) == 0.0
    with pytest.raises(ValueError):
        geo.ea_components(I2, E)  # not trace-free


def test_ea_roundtrip():
    rng = np.random.default_rng(2)
    for _ in range(20):
        G = random_spd(rng)
        E = geo.frame_matrix(G)
        val = complex(rng.normal(), rng.normal())
        M = geo.ea_matrix(val, E)
        # reconstruction is g-symmetric and trace-free
        np.testing.assert_allclose(G @ M, (G @ M).T, atol=1e-12)
        assert abs(np.trace(M)) < 1e-12
        assert geo.ea_components(M, E) == pytest.approx(val, abs=1e-12)


def test_complex_structure():
    J0 = np.array([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_allclose(geo.complex_structure(I2), J0, atol=1e-15)
    np.testing.assert_allclose(
        geo.complex_structure(np.diag([4.0, 1.0])),
        np.array([[0.0, -0.5], [2.0, 0.0]]), atol=1e-14)
    rng = np.random.default_rng(3)
    for _ in range(20):
        G = random_spd(rng)
        j = geo.complex_structure(G)
        np.testing.assert_allclose(j @ j, -I2, atol=1e-10)
        np.testing.assert_allclose(j.T @ G @ j, G, atol=1e-10)
        v = rng.normal(size=2)
        assert np.linalg.det(np.column_stack([v, j @ v])) > 0


def test_complex_structure_anticommutes_with_section():
    rng = np.random.default_rng(4)
    for _ in range(10):
        G = random_spd(rng)
        j = geo.complex_structure(G)
        E = geo.frame_matrix(G)
        M = geo.ea_matrix(complex(rng.normal(), rng.normal()), E)
        np.testing.assert_allclose(j @ M + M @ j, np.zeros((2, 2)), atol=1e-10)


def test_endo_split():
    J0 = np.array([[0.0, -1.0], [1.0, 0.0]])
    c, a = geo.endo_split(I2, J0)
    np.testing.assert_allclose(c, I2)
    np.testing.assert_allclose(a, np.zeros((2, 2)))
    rot = np.array([[np.cos(0.7), -np.sin(0.7)], [np.sin(0.7), np.cos(0.7)]])
    c, a = geo.endo_split(rot, J0)
    np.testing.assert_allclose(c, rot, atol=1e-14)
    np.testing.assert_allclose(a, np.zeros((2, 2)), atol=1e-14)
    M = np.array([[1.0, 1.0], [1.0, -1.0]])
    c, a = geo.endo_split(M, J0)
    np.testing.assert_allclose(a, M, atol=1e-14)
    np.testing.assert_allclose(c, np.zeros((2, 2)), atol=1e-14)


def test_endo_split_random():
    rng = np.random.default_rng(5)
    for _ in range(20):
        G = random_spd(rng)
        j = geo.complex_structure(G)
        M = rng.normal(size=(2, 2))
        c, a = geo.endo_split(M, j)
        np.testing.assert_allclose(c + a, M, atol=1e-12)
        np.testing.assert_allclose(j @ c - c @ j, np.zeros((2, 2)), atol=1e-10)
        np.testing.assert_allclose(j @ a + a @ j, np.zeros((2, 2)), atol=1e-10)


def test_endo_split_recovers_trace_free_part():
    # for a g-symmetric M the anticommuting part is its trace-free part
    rng = np.random.default_rng(6)
    for _ in range(10):
        G = random_spd(rng)
        s = rng.normal(size=(2, 2))
        A = s + s.T
        M = geo.endo_of_tensor(G, A)
        j = geo.complex_structure(G)
        _, anti = geo.endo_split(M, j)
        np.testing.assert_allclose(anti, geo.trace_free(M), atol=1e-10)


def test_pullback_metric():
    np.testing.assert_allclose(geo.pullback_metric(I2, I2), I2)
    M = np.array([[1.0, 2.0], [0.0, 1.0]])
    np.testing.assert_allclose(geo.pullback_metric(M, I2), M.T @ M)
    rot = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
    np.testing.assert_allclose(geo.pullback_metric(rot, I2), I2, atol=1e-15)


def test_complex_structure_commutes_with_isometries():
    # rotations are isometries of the Euclidean disc: d(phi) j = j d(phi)
    g = geo.default_metric(surfaces.disc())
    J = geo.complex_structure(np.eye(2))
    for ang in (0.3, 1.1, 2.9):
        R = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        np.testing.assert_allclose(R @ J, J @ R, atol=1e-8)
    assert g.role == "metric"


# --- surfaces and tensor fields ---------------------------------------------

def test_surface_euler_characteristics():
    assert surfaces.disc().euler_characteristic == 1
    assert surfaces.annulus().euler_characteristic == 0
    assert surfaces.torus(0.3 + 1.1j).euler_characteristic == 0
    assert surfaces.sphere().euler_characteristic == 2


def test_boundary_frames_positive_orthonormal():
    for surf in (surfaces.disc(), surfaces.annulus(0.4)):
        g = geo.default_metric(surf)
        for comp in surf.boundary:
            theta = np.linspace(0, 2 * np.pi, 50)
            nu, tau = geo.boundary_frames(g, comp, theta)
            pu, pv = comp.point(theta)
            G = g.matrix(comp.chart_id, pu, pv)
            for a, b, want in ((nu, nu, 1.0), (tau, tau, 1.0), (nu, tau, 0.0)):
                val = np.einsum("...i,...ij,...j->...", a, G, b)
                np.testing.assert_allclose(val, want, atol=1e-10)
            det = nu[..., 0] * tau[..., 1] - nu[..., 1] * tau[..., 0]
            assert np.all(det > 0)


def test_boundary_outward_normal():
    surf = surfaces.annulus(0.4)
    g = geo.default_metric(surf)
    theta = np.linspace(0, 2 * np.pi, 17)
    outer, inner = surf.boundary
    nu, _ = geo.boundary_frames(g, outer, theta)
    pu, pv = outer.point(theta)
    assert np.all(nu[..., 0] * pu + nu[..., 1] * pv > 0)  # points away from origin
    nu, _ = geo.boundary_frames(g, inner, theta)
    pu, pv = inner.point(theta)
    assert np.all(nu[..., 0] * pu + nu[..., 1] * pv < 0)  # points into the hole


def test_reflection_matrix_euclidean_circle():
    surf = surfaces.disc()
    g = geo.default_metric(surf)
    comp = surf.boundary[0]
    theta = np.linspace(0, 2 * np.pi, 40)
    nu, tau = geo.boundary_frames(g, comp, theta)
    pu, pv = comp.point(theta)
    G = g.matrix(comp.chart_id, pu, pv)
    R = geo.reflection_matrix(G, nu, tau)
    # R tau = tau, R nu = -nu, R^2 = I
    np.testing.assert_allclose(np.einsum("...ij,...j->...i", R, tau), tau,
                               atol=1e-10)
    np.testing.assert_allclose(np.einsum("...ij,...j->...i", R, nu), -nu,
                               atol=1e-10)
    np.testing.assert_allclose(np.einsum("...ij,...jk->...ik", R, R),
                               np.broadcast_to(I2, R.shape), atol=1e-10)
    # Euclidean formula 2 t t^T - I with t the unit tangent
    t = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
    expected = 2 * np.einsum("...i,...j->...ij", t, t) - I2
    np.testing.assert_allclose(R, expected, atol=1e-10)


def test_tensorfield_from_expressions_and_metric_validation():
    surf = surfaces.disc()
    g = geo.TensorField.from_expressions(
        surf, ("1 + u^2", "u*v/2", "1 + v^2"), role="metric")
    g.validate_metric()
    G = g.matrix("main", 0.3, -0.2)
    assert G[0, 0] == pytest.approx(1.09)
    assert G[0, 1] == pytest.approx(-0.03)
    bad = geo.TensorField.from_expressions(surf, ("u", "0", "u"), role="metric")
    with pytest.raises(DegenerateMetric):
        bad.validate_metric()


def test_torus_field_periodicity_check():
    surf = surfaces.torus(0.3 + 1.1j)
    h = geo.random_trig_tensorfield(surf, degree=3, seed=5)
    h.check_compatibility(tol=1e-9)
    chart = surf.charts[0]
    u, v = 0.21, 0.4
    base = np.stack(h.entries(chart.id, u, v))
    for shift in (1.0, 0.3 + 1.1j):
        moved = np.stack(h.entries(chart.id, u + shift.real, v + shift.imag))
        np.testing.assert_allclose(moved, base, atol=1e-9)


def test_sphere_round_metric_transition_consistency():
    surf = surfaces.sphere()
    g = geo.default_metric(surf)
    g.check_compatibility(tol=1e-9)


def test_sphere_section_transport_across_overlap():
    # tensor from a fixed ambient quadratic form restricted to the sphere
    # must give sections whose components transport consistently
    surf = surfaces.sphere()
    g = geo.default_metric(surf)
    amb = np.diag([1.0, 2.0, 3.0])

    def patch(chart_id):
        sign = 1.0 if chart_id == "a" else -1.0

        def embed_jac(u, v):
            d = 1.0 + u * u + v * v
            x, y, z = 2 * u / d, sign * 2 * v / d, sign * (u * u + v * v - 1) / d
            dxu = (2 * d - 4 * u * u) / d**2
            dxv = -4 * u * v / d**2
            dyu = sign * -4 * u * v / d**2
            dyv = sign * (2 * d - 4 * v * v) / d**2
            dzu = sign * 4 * u / d**2
            dzv = sign * 4 * v / d**2
            P = np.array([[dxu, dxv], [dyu, dyv], [dzu, dzv]])
            return P

        def entries(u, v):
            u = np.atleast_1d(np.asarray(u, dtype=float))
            v = np.atleast_1d(np.asarray(v, dtype=float))
            h11 = np.empty_like(u)
            h12 = np.empty_like(u)
            h22 = np.empty_like(u)
            for k in range(u.size):
                P = embed_jac(u.flat[k], v.flat[k])
                Hm = P.T @ amb @ P
                h11.flat[k], h12.flat[k], h22.flat[k] = Hm[0, 0], Hm[0, 1], Hm[1, 1]
            return h11.reshape(np.shape(u)), h12.reshape(np.shape(u)), \
                h22.reshape(np.shape(u))

        return entries

    h = geo.TensorField(surf, {"a": patch("a"), "b": patch("b")})
    h.check_compatibility(tol=1e-8)
    sec = geo.EASection.from_tensor_pair(surf, g, h)
    tmap, tjac = surf.transition("a", "b")
    rng = np.random.default_rng(8)
    for _ in range(10):
        ang = rng.uniform(0, 2 * np.pi)
        r = rng.uniform(0.9, 1.1)
        u, v = r * np.cos(ang), r * np.sin(ang)
        up, vp = tmap(u, v)
        J = tjac(np.asarray(u), np.asarray(v))
        Ma = sec.matrix("a", u, v)
        Mb = sec.matrix("b", up, vp)
        # endomorphisms transform by conjugation with the transition Jacobian
        np.testing.assert_allclose(np.linalg.inv(J) @ Mb @ J, Ma, atol=1e-8)


def test_easection_pair_matches_generic_path():
    surf = surfaces.disc()
    g = geo.TensorField.from_expressions(
        surf, ("1 + u^2/2", "u*v/4", "1 + v^2/3"), role="metric")
    h = geo.TensorField.from_expressions(
        surf, ("sin(u)", "u*v", "cos(v)"))
    sec = geo.EASection.from_tensor_pair(surf, g, h)
    rng = np.random.default_rng(9)
    for _ in range(15):
        u, v = rng.uniform(-0.7, 0.7, 2)
        G = g.matrix("main", u, v)
        A = h.matrix("main", u, v)
        Ha = geo.trace_free(geo.endo_of_tensor(G, A))
        want = geo.ea_components(Ha, geo.frame_matrix(G))
        got = complex(sec.components("main", u, v))
        assert got == pytest.approx(want, abs=1e-12)


def test_tensor_combination_shifts_by_metric():
    # adding c*g to h leaves the trace-free section unchanged
    surf = surfaces.disc()
    g = geo.default_metric(surf)
    h = geo.TensorField.from_expressions(surf, ("u", "v", "u*v"))
    h2 = geo.tensor_combination(h, g, 1.0, 3.7)
    s1 = geo.EASection.from_tensor_pair(surf, g, h)
    s2 = geo.EASection.from_tensor_pair(surf, g, h2)
    U, V = np.meshgrid(np.linspace(-0.5, 0.5, 9), np.linspace(-0.5, 0.5, 9))
    np.testing.assert_allclose(s1.components("main", U, V),
                               s2.components("main", U, V), atol=1e-12)


def test_sphere_transitions_are_mutually_inverse():
    surf = surfaces.sphere()
    fwd, fjac = surf.transition("a", "b")
    back, bjac = surf.transition("b", "a")
    rng = np.random.default_rng(12)
    for _ in range(12):
        ang = rng.uniform(0, 2 * np.pi)
        r = rng.uniform(0.7, 1.4)
        u, v = r * np.cos(ang), r * np.sin(ang)
        up, vp = fwd(u, v)
        uu, vv = back(up, vp)
        assert (uu, vv) == pytest.approx((u, v), abs=1e-12)
        J1 = fjac(np.asarray(u), np.asarray(v))
        J2 = bjac(np.asarray(up), np.asarray(vp))
        np.testing.assert_allclose(J2 @ J1, np.eye(2), atol=1e-10)
