import numpy as np
import pytest

from conformal_points import embedded
from conformal_points.errors import DegenerateUmbilicLocus


def test_unit_sphere_patch_is_totally_umbilic():
    surf = embedded.ellipsoid_surface((1.0, 1.0, 1.0))
    patch = surf.params["patches"]["a"]
    rng = np.random.default_rng(0)
    for _ in range(10):
        u, v = rng.uniform(-0.8, 0.8, 2)
        G, H = embedded.fundamental_forms(patch, (u, v))
        np.testing.assert_allclose(H, G, atol=1e-10)  # h = g pointwise


def test_cylinder_forms():
    patch = embedded.EmbeddedPatch(("cos(u)", "sin(u)", "v"))
    G, H = embedded.fundamental_forms(patch, (0.7, 0.3))
    np.testing.assert_allclose(G, np.eye(2), atol=1e-12)
    # with the outward normal of this parametrization the curved direction
    # carries curvature -1, the ruling 0
    np.testing.assert_allclose(H, np.diag([-1.0, 0.0]), atol=1e-12)


def test_paraboloid_graph_forms_at_origin():
    patch = embedded.EmbeddedPatch(("u", "v", "(u^2 + v^2)/2"))
    G, H = embedded.fundamental_forms(patch, (0.0, 0.0))
    np.testing.assert_allclose(G, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(H, np.eye(2), atol=1e-14)


def test_degenerate_parametrization_rejected():
    patch = embedded.EmbeddedPatch(("u^2", "u^2", "v"))  # rho_u = 0 at u=0
    with pytest.raises(ValueError):
        embedded.fundamental_forms(patch, (0.0, 0.5))


def test_umbilics_revolution_ellipsoid():
    report = embedded.umbilics((1.0, 1.0, 1.5))
    assert report.passed
    assert report.lhs == report.rhs == 4
    assert sorted(p.index for p in report.points) == [2, 2]
    for p in report.points:
        assert np.hypot(p.u, p.v) < 1e-7  # the poles sit at the chart centers


def test_umbilics_triaxial_ellipsoid():
    report = embedded.umbilics((1.0, 1.2, 1.5))
    assert report.passed
    assert report.lhs == report.rhs == 4
    assert [p.index for p in report.points] == [1, 1, 1, 1]
    # classical closed form: umbilics lie in the x-z plane at
    # x = +-a*sqrt((a^2-b^2)/(a^2-c^2)), z = +-c*sqrt((b^2-c^2)/(a^2-c^2))
    a2, b2, c2 = 1.0, 1.2**2, 1.5**2
    x_star = np.sqrt((a2 - b2) / (a2 - c2))
    z_star = 1.5 * np.sqrt((b2 - c2) / (a2 - c2))
    rho = np.sqrt((1 - z_star / 1.5) / (1 + z_star / 1.5))
    for p in report.points:
        assert abs(p.v) < 1e-7  # x-z plane means v = 0 in both charts
        assert abs(abs(p.u) - rho) < 1e-7
        ex, ey, ez = surf_point(p)
        assert abs(abs(ex) - x_star) < 1e-7
        assert abs(ey) < 1e-7
        assert abs(abs(ez) - z_star) < 1e-7


def surf_point(cp):
    surf = embedded.ellipsoid_surface((1.0, 1.2, 1.5))
    patch = surf.params["patches"][cp.chart_id]
    return patch.position(cp.u, cp.v)


def test_round_sphere_is_degenerate():
    with pytest.raises(DegenerateUmbilicLocus):
        embedded.umbilics((1.0, 1.0, 1.0))
    # nearly-round ellipsoids still have isolated umbilics
    report = embedded.umbilics((1.0, 1.0, 1.02))
    assert report.lhs == 4


def test_forms_transform_consistently_across_atlas():
    surf = embedded.ellipsoid_surface((1.0, 1.2, 1.5))
    g, h = embedded.fundamental_tensorfields(surf)
    g.check_compatibility(tol=1e-8)
    h.check_compatibility(tol=1e-8)
    g.validate_metric()


def test_rigid_motion_invariance():
    base = embedded.umbilics((1.0, 1.2, 1.5))
    # rotate the embedding in R^3 and translate it; umbilic locations in the
    # parameters and the indices must be unchanged
    ang = 0.7
    R = np.array([[np.cos(ang), -np.sin(ang), 0.0],
                  [np.sin(ang), np.cos(ang), 0.0],
                  [0.0, 0.0, 1.0]]) @ \
        np.array([[1.0, 0.0, 0.0],
                  [0.0, np.cos(0.4), -np.sin(0.4)],
                  [0.0, np.sin(0.4), np.cos(0.4)]])
    t = (0.3, -1.1, 0.25)
    surf = embedded.ellipsoid_surface((1.0, 1.2, 1.5))
    moved_patches = {}
    for cid, patch in surf.params["patches"].items():
        sx, sy, sz = patch.sources
        comps = tuple(
            f"({float(R[i, 0])!r})*({sx}) + ({float(R[i, 1])!r})*({sy}) + "
            f"({float(R[i, 2])!r})*({sz}) + ({float(t[i])!r})"
            for i in range(3))
        moved_patches[cid] = embedded.EmbeddedPatch(comps)
    surf.params["patches"] = moved_patches
    g, h = embedded.fundamental_tensorfields(surf)
    from conformal_points.counting import verify_count_identity
    report = verify_count_identity(g, h, surf)
    assert report.passed and report.lhs == 4
    key = lambda p: (p.chart_id, round(p.u, 6), round(p.v, 6))
    assert sorted(map(key, report.points)) == sorted(map(key, base.points))
    assert sorted(p.index for p in report.points) == \
        sorted(p.index for p in base.points)


def test_scaling_invariance():
    lam = 2.5
    surf = embedded.ellipsoid_surface((1.0, 1.2, 1.5))
    patch = surf.params["patches"]["a"]
    scaled = embedded.EmbeddedPatch(
        tuple(f"({lam!r})*({s})" for s in patch.sources))
    rng = np.random.default_rng(3)
    for _ in range(6):
        u, v = rng.uniform(-0.8, 0.8, 2)
        G, H = embedded.fundamental_forms(patch, (u, v))
        Gs, Hs = embedded.fundamental_forms(scaled, (u, v))
        np.testing.assert_allclose(Gs, lam**2 * G, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(Hs, lam * H, rtol=1e-10, atol=1e-12)
    big = embedded.umbilics((lam * 1.0, lam * 1.2, lam * 1.5))
    small = embedded.umbilics((1.0, 1.2, 1.5))
    key = lambda p: (p.chart_id, round(p.u, 6), round(p.v, 6), p.index)
    assert sorted(map(key, big.points)) == sorted(map(key, small.points))


def test_normal_flip_preserves_umbilics_and_indices():
    surf = embedded.ellipsoid_surface((1.0, 1.2, 1.5))
    g, h = embedded.fundamental_tensorfields(surf)
    from conformal_points.counting import verify_count_identity
    from conformal_points.geometry import tensor_combination
    h_flipped = tensor_combination(h, h, -1.0, 0.0)  # opposite normal
    r1 = verify_count_identity(g, h, surf)
    r2 = verify_count_identity(g, h_flipped, surf)
    key = lambda p: (p.chart_id, round(p.u, 6), round(p.v, 6), p.index)
    assert sorted(map(key, r1.points)) == sorted(map(key, r2.points))
    assert r2.passed
