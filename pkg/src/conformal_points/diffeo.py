"""Boundary behavior of orientation-preserving diffeomorphisms.

Along each boundary component, the derivative of a boundary-preserving
diffeomorphism expressed in the outward-normal/tangent frames is lower
triangular with positive corner entries,

    N = c * [[a, 0], [b, 1]],     a, c > 0,

and the winding of the pulled-back metric's trace-free section along that
component can be computed three independent ways: directly against the
tangent reflection, as the winding of the plane curve (a-1, b) around the
origin, and as the degree of the top-eigendirection map of Q = N^T N / c^2
into R/pi.  All three must agree; the verification runs them side by side.
"""

from __future__ import annotations

import numpy as np

from . import expr
from .config import DEFAULT
from .counting import verify_count_identity
from .errors import (
    ConformalBoundaryPoint,
    EigenvalueCollision,
    HypothesisViolation,
    NonVanishingViolation,
    NotBoundaryPreserving,
    OrientationError,
)
from .geometry import (
    EASection,
    TensorField,
    boundary_frames,
    boundary_reflection_section,
    default_metric,
    section_on_boundary,
)
from .winding import relative_winding, winding_of_curve

__all__ = [
    "DiffeoMap", "pullback_field", "boundary_frame_matrix", "extract_abc",
    "boundary_data_fn", "winding_ab", "q_matrix", "eigendirection_winding",
    "verify_boundary_winding_formula", "verify_area_preserving_count",
    "crossing_checks", "rotation_profile_map", "disc_area_twist",
    "annulus_area_twist", "seeded_annulus_map",
]

BOUNDARY_TOL = 1e-8


class DiffeoMap:
    """Diffeomorphism of a one-chart surface given by component expressions.

    The derivative matrix is symbolic (never finite differences): winding
    integrality at the boundary is sensitive to derivative noise.
    """

    def __init__(self, surface, fu_ast, fv_ast, boundary_map=None, sources=None):
        self.surface = surface
        if len(surface.charts) != 1:
            raise ValueError("diffeomorphism analysis expects a one-chart surface")
        self.chart = surface.charts[0]
        coords = self.chart.coords
        self._f = [expr.compile_evaluator(fu_ast, coords),
                   expr.compile_evaluator(fv_ast, coords)]
        self._df = [[expr.compile_evaluator(expr.differentiate(ast, var), coords)
                     for var in coords] for ast in (fu_ast, fv_ast)]
        n = len(surface.boundary)
        self.boundary_map = dict(boundary_map) if boundary_map else \
            {i: i for i in range(n)}
        self.sources = sources

    @classmethod
    def from_expressions(cls, surface, components, boundary_map=None):
        coords = surface.charts[0].coords
        fu = expr.parse(components[0], coords)
        fv = expr.parse(components[1], coords)
        return cls(surface, fu, fv, boundary_map=boundary_map,
                   sources=tuple(components))

    def __call__(self, u, v):
        with np.errstate(all="ignore"):
            return self._f[0](u, v), self._f[1](u, v)

    def jacobian(self, u, v):
        u = np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            rows = [[np.broadcast_to(self._df[i][j](u, v), u.shape)
                     for j in (0, 1)] for i in (0, 1)]
        J = np.empty(u.shape + (2, 2))
        for i in (0, 1):
            for j in (0, 1):
                J[..., i, j] = rows[i][j]
        return J

    def validate(self, samples=48, tol=BOUNDARY_TOL):
        """Orientation (det dF > 0 on a sample grid) and boundary preservation."""
        grid = self.chart.scan_grid(samples)
        u, v = grid.u[grid.mask], grid.v[grid.mask]
        det = np.linalg.det(self.jacobian(u, v))
        if not np.all(det > 0):
            raise OrientationError(
                f"map does not preserve orientation: min det dF = {det.min():g}")
        theta = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        for i, comp in enumerate(self.surface.boundary):
            target = self.surface.boundary[self.boundary_map[i]]
            qu, qv = self(*comp.point(theta))
            dist = np.abs(np.hypot(qu - target.center[0], qv - target.center[1])
                          - target.radius)
            if np.max(dist) > tol:
                raise NotBoundaryPreserving(
                    f"image of {comp.name} misses {target.name} by "
                    f"{np.max(dist):g}")


def pullback_field(F, g):
    """The pulled-back metric F*g as a tensor field (entries dF^T G(F) dF)."""
    chart_id = F.chart.id

    def entries(u, v):
        J = F.jacobian(u, v)
        qu, qv = F(u, v)
        G = g.matrix(chart_id, qu, qv)
        A = np.einsum("...ji,...jk,...kl->...il", J, G, J)
        return A[..., 0, 0], A[..., 0, 1], A[..., 1, 1]

    return TensorField(F.surface, {chart_id: entries}, role="metric")


def boundary_frame_matrix(F, g, component_index, theta):
    """dF along a boundary component, expressed between the boundary frames.

    Rows/columns refer to (outward normal, positive tangent) at the source
    and image points.  Raises when the result is not of the boundary-
    preserving lower-triangular shape with positive tangent stretch.
    """
    src = F.surface.boundary[component_index]
    dst = F.surface.boundary[F.boundary_map[component_index]]
    theta = np.asarray(theta, dtype=float)
    pu, pv = src.point(theta)
    qu, qv = F(pu, pv)
    theta_q = dst.locate(qu, qv)
    nu_i, tau_i = boundary_frames(g, src, theta)
    nu_j, tau_j = boundary_frames(g, dst, theta_q)
    P_i = np.stack([nu_i, tau_i], axis=-1)
    P_j = np.stack([nu_j, tau_j], axis=-1)
    J = F.jacobian(pu, pv)
    N = np.linalg.solve(P_j, np.einsum("...ij,...jk->...ik", J, P_i))
    if np.any(np.abs(N[..., 0, 1]) >= BOUNDARY_TOL):
        raise NotBoundaryPreserving(
            f"dF maps the boundary tangent off the boundary tangent line "
            f"(|N12| up to {np.max(np.abs(N[..., 0, 1])):g})")
    if np.any(N[..., 1, 1] <= 0):
        raise OrientationError(
            "boundary tangent reverses direction under the map")
    return N


def extract_abc(N):
    """Split N = c ((a,0),(b,1)) into (a, b, c); inverse of the normal form."""
    N = np.asarray(N, dtype=float)
    if np.any(np.abs(N[..., 0, 1]) >= BOUNDARY_TOL):
        raise NotBoundaryPreserving("matrix has a nonzero upper-right entry")
    if np.any(N[..., 1, 1] <= 0):
        raise OrientationError("matrix has a nonpositive tangent stretch")
    c = N[..., 1, 1]
    a = N[..., 0, 0] / c
    b = N[..., 1, 0] / c
    return a, b, c


def boundary_data_fn(F, g, component_index):
    """theta -> (a, b, c) along one boundary component."""

    def fn(theta):
        N = boundary_frame_matrix(F, g, component_index, theta)
        return extract_abc(N)

    return fn


def winding_ab(ab_fn, tol=DEFAULT):
    """Winding number of theta -> (a-1, b) around the origin."""

    def curve(theta):
        a, b, _ = ab_fn(theta)
        return (a - 1.0) + 1j * b

    try:
        return winding_of_curve(curve, tol=tol)
    except NonVanishingViolation as exc:
        raise ConformalBoundaryPoint(
            "the boundary data passes through (a, b) = (1, 0): the map has a "
            "conformal point on the boundary") from exc


def q_matrix(N, c):
    """Q with N^T N = c^2 Q; equals ((a^2+b^2, b), (b, 1)) for admissible N."""
    N = np.asarray(N, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0):
        raise ValueError("the normal form scale c must be positive")
    return np.einsum("...ji,...jk->...ik", N, N) / (c * c)[..., None, None]


def eigendirection_winding(q_fn, tol=DEFAULT):
    """Degree of the top-eigendirection map of a symmetric-matrix loop in R/pi.

    The direction doubles to the curve (q11 - q22) + 2i*q12, whose norm is
    the eigenvalue gap; winding that curve counts how often the eigenline
    sweeps through the space of unoriented directions.
    """

    def gap_curve(theta):
        Q = np.asarray(q_fn(theta), dtype=float)
        return (Q[..., 0, 0] - Q[..., 1, 1]) + 2j * Q[..., 0, 1]

    try:
        return winding_of_curve(gap_curve, tol=tol)
    except NonVanishingViolation as exc:
        raise EigenvalueCollision(
            "the symmetric matrices have (numerically) equal eigenvalues "
            "somewhere on the loop") from exc


def verify_boundary_winding_formula(F, g=None, tol=DEFAULT):
    """Three independent windings per boundary component; all must agree.

    Returns a list of per-component records with the direct relative winding
    of the pulled-back section against the tangent reflection, the winding of
    (a-1, b), and the eigendirection degree.
    """
    g = g or default_metric(F.surface)
    F.validate()
    h = pullback_field(F, g)
    section = EASection.from_tensor_pair(F.surface, g, h)
    records = []
    for i, comp in enumerate(F.surface.boundary):
        s_fn = section_on_boundary(section, comp)
        r_fn = boundary_reflection_section(g, comp)
        try:
            w_direct = relative_winding(s_fn, r_fn, tol=tol)
        except NonVanishingViolation as exc:
            raise ConformalBoundaryPoint(
                f"the map is conformal somewhere on {comp.name}") from exc
        data = boundary_data_fn(F, g, i)
        w_ab = winding_ab(data, tol=tol)

        def q_fn(theta, i=i):
            N = boundary_frame_matrix(F, g, i, theta)
            return q_matrix(N, N[..., 1, 1])

        w_eig = eigendirection_winding(q_fn, tol=tol)
        records.append({
            "component": comp.name,
            "winding_direct": int(w_direct),
            "winding_ab": int(w_ab),
            "winding_eigendirection": int(w_eig),
            "agree": w_direct == w_ab == w_eig,
        })
    return records


def verify_area_preserving_count(F, g=None, tol=DEFAULT):
    """Count identity for boundary-identity, area-preserving maps.

    Checks the hypotheses (identity on the boundary, unit Jacobian), verifies
    that every boundary winding vanishes, and that the algebraic count of
    conformal points is twice the Euler characteristic.
    """
    g = g or default_metric(F.surface)
    theta = np.linspace(0, 2 * np.pi, 128, endpoint=False)
    for comp in F.surface.boundary:
        pu, pv = comp.point(theta)
        qu, qv = F(pu, pv)
        err = np.max(np.hypot(qu - pu, qv - pv))
        if err > BOUNDARY_TOL:
            raise HypothesisViolation(
                f"map is not the identity on {comp.name} (deviation {err:g})")
    grid = F.chart.scan_grid(64)
    u, v = grid.u[grid.mask], grid.v[grid.mask]
    det = np.linalg.det(F.jacobian(u, v))
    if np.max(np.abs(det - 1.0)) > BOUNDARY_TOL:
        raise HypothesisViolation(
            f"map does not preserve the area form "
            f"(|det dF - 1| up to {np.max(np.abs(det - 1.0)):g})")
    # interior scan first: an everywhere-conformal map surfaces as a
    # degenerate (non-isolated) zero locus, not as a boundary failure
    report = verify_count_identity(g, pullback_field(F, g), F.surface, tol=tol)
    records = verify_boundary_winding_formula(F, g, tol=tol)
    windings = [r["winding_direct"] for r in records]
    expected = 2 * F.surface.euler_characteristic
    return {
        "boundary_windings": windings,
        "windings_vanish": all(w == 0 for w in windings),
        "algebraic_count": report.lhs,
        "expected_count": expected,
        "count_matches": report.lhs == expected and report.passed,
        "report": report,
        "three_way": records,
    }


def _derivative5(fn, x, h=1e-4):
    """Fourth-order central difference."""
    return (-fn(x + 2 * h) + 8 * fn(x + h) - 8 * fn(x - h) + fn(x - 2 * h)) / (12 * h)


def crossing_checks(F, g=None, n_scan=512, tol=DEFAULT):
    """Transversal crossings of the positive real axis by (a-1, b).

    For every crossing (b = 0, a > 1) the record carries the numerically
    differentiated eigendirection angle rate together with the two candidate
    closed forms b'/(a-1) (as stated alongside the winding formula) and the
    corrected b'/(a^2-1); the sign of the rate must match the sign of b'.
    """
    g = g or default_metric(F.surface)
    out = []
    for i, comp in enumerate(F.surface.boundary):
        data = boundary_data_fn(F, g, i)

        def b_of(theta):
            return data(np.asarray(theta, dtype=float))[1]

        def a_of(theta):
            return data(np.asarray(theta, dtype=float))[0]

        def q_angle(theta):
            a, b, _ = data(np.asarray(theta, dtype=float))
            return 0.5 * np.arctan2(2 * b, a * a + b * b - 1.0)

        theta = np.linspace(0, 2 * np.pi, n_scan, endpoint=False)
        b_vals = b_of(theta)
        for k in range(n_scan):
            t0, t1 = theta[k], theta[k] + 2 * np.pi / n_scan
            b0, b1 = b_vals[k], b_vals[(k + 1) % n_scan]
            if b0 == 0.0 or b0 * b1 >= 0:
                continue
            for _ in range(80):  # bisection on b
                tm = 0.5 * (t0 + t1)
                bm = float(b_of(tm))
                if bm == 0.0:
                    break
                if b0 * bm < 0:
                    t1 = tm
                else:
                    t0, b0 = tm, bm
            theta0 = 0.5 * (t0 + t1)
            a0 = float(a_of(theta0))
            if a0 <= 1.0:
                continue  # crossing of the negative axis: not counted here
            bp = float(_derivative5(b_of, theta0))
            if abs(bp) < 1e-6:
                continue  # not transversal
            qp = float(_derivative5(q_angle, theta0))
            out.append({
                "component": comp.name,
                "theta0": theta0,
                "a": a0,
                "b_prime": bp,
                "q_prime": qp,
                "reference_stated": bp / (a0 - 1.0),
                "reference_corrected": bp / (a0 * a0 - 1.0),
                "signs_agree": np.sign(qp) == np.sign(bp),
            })
    return out


# --- map constructors --------------------------------------------------------

def rotation_profile_map(surface, angle_source, boundary_map=None):
    """Map rotating each point by a smooth angle W(u, v): z -> exp(i W) z.

    Rotation profiles preserve every circle around the origin, so they map
    each boundary component of the disc and the annulus to itself.
    """
    fu = f"u*cos({angle_source}) - v*sin({angle_source})"
    fv = f"u*sin({angle_source}) + v*cos({angle_source})"
    return DiffeoMap.from_expressions(surface, (fu, fv),
                                      boundary_map=boundary_map)


def disc_area_twist(surface, strength=1.0):
    """Area-preserving twist of the disc, identity on the boundary.

    The rotation angle depends only on the radius, so the Jacobian is exactly
    one; the profile strength*(1 - r^2) vanishes on the boundary and has
    nonvanishing radial derivative away from the center, making the center
    the only conformal point.
    """
    return rotation_profile_map(surface, f"{float(strength)!r}*(1 - (u^2 + v^2))")


def annulus_area_twist(surface):
    """Area-preserving twist of the annulus whose boundary rotations are
    full turns, hence pointwise the identity there."""
    r_in = surface.params["inner_radius"]
    prof = f"2*pi*(sqrt(u^2 + v^2) - {r_in!r})/(1 - {r_in!r})"
    return rotation_profile_map(surface, prof)


def seeded_annulus_map(surface, seed):
    """Random rotation-profile annulus diffeomorphism with angular shear.

    The profile mixes a radial twist with an angular modulation; the
    modulation is kept small enough that the map stays a diffeomorphism.
    Odd seeds make the angular part dominate the radial shear at the
    boundary, which produces nonzero windings of (a-1, b) and transversal
    crossings of the positive axis; even seeds are twist-dominated.
    """
    rng = np.random.default_rng(seed)
    r_in = surface.params["inner_radius"]
    k = int(rng.integers(1, 4))
    phase = float(rng.uniform(0, 2 * np.pi))
    b0 = float(rng.uniform(-0.5, 0.5))
    if seed % 2 == 0:
        b1 = float(rng.uniform(0.4, 1.1)) * (1 if rng.uniform() < 0.5 else -1)
        b2 = float(rng.uniform(-0.4, 0.4))
        c0 = float(rng.uniform(-0.9, 0.9))
        c1 = float(rng.uniform(-0.9, 0.9))
    else:
        b1 = float(rng.uniform(-0.08, 0.08))
        b2 = float(rng.uniform(-0.05, 0.05))
        c0 = float(rng.uniform(0.2, 0.45)) * (1 if rng.uniform() < 0.5 else -1)
        c1 = float(rng.uniform(0.6, 0.9)) * (1 if rng.uniform() < 0.5 else -1)
    eps = float(min(0.8 / (k * (abs(c0) + abs(c1))), 0.45))
    r = "sqrt(u^2 + v^2)"
    radial = f"{b0!r} + {b1!r}*({r} - {r_in!r}) + {b2!r}*({r} - {r_in!r})^2"
    angular = (f"{eps!r}*sin({k}*atan2(v, u) + {phase!r})"
               f"*({c0!r} + {c1!r}*({r} - {r_in!r}))")
    return rotation_profile_map(surface, f"{radial} + {angular}")
