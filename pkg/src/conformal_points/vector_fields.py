"""Cauchy-Riemann operator on vector fields and its conformal-point count.

On an isothermal chart the antiholomorphic derivative of a complex vector
field component f reduces to

    dbar f = (d/du f + i d/dv f) / 2,

and its value is read as a section of the trace-free symmetric bundle: the
endomorphism v -> (dbar f) * conj(v) has frame components exactly (Re, Im)
of the value.  Zeros of that section are the points at which the flow of
the field preserves conformality to first order; their algebraic count obeys
the same identity as conformal points of tensor pairs.
"""

from __future__ import annotations

import numpy as np

from . import expr
from .config import DEFAULT
from .counting import boundary_windings
from .errors import HypothesisViolation
from .geometry import (
    EASection,
    default_metric,
    ea_components,
    endo_of_tensor,
    frame_matrix,
    pullback_metric,
    trace_free,
)
from .surfaces import TorusChart
from .winding import algebraic_count, locate_zeros_of_section

__all__ = [
    "VectorField", "dbar_section", "conformal_points_of_field",
    "verify_field_count_identity", "linearization_check",
]


def _require_isothermal(g, chart, samples=12, tol=1e-9):
    grid = chart.scan_grid(samples)
    u, v = grid.u[grid.mask], grid.v[grid.mask]
    g11, g12, g22 = g.entries(chart.id, u, v)
    scale = np.abs(g11).max()
    if np.abs(g11 - g22).max() > tol * scale or np.abs(g12).max() > tol * scale:
        raise HypothesisViolation(
            f"chart {chart.id!r} is not isothermal for the metric: the "
            "antiholomorphic derivative formula does not apply")


class VectorField:
    """Vector field as complex chart components (real and imaginary parts).

    The components live in the coordinate frame of each chart; on the torus
    they must be doubly periodic, which ``validate`` spot-checks.
    """

    def __init__(self, surface, parts):
        # parts: chart_id -> (re_ast, im_ast)
        self.surface = surface
        self._value = {}
        self._deriv = {}
        self.sources = {}
        for chart_id, (re_ast, im_ast) in parts.items():
            coords = surface.chart(chart_id).coords
            self._value[chart_id] = (expr.compile_evaluator(re_ast, coords),
                                     expr.compile_evaluator(im_ast, coords))
            self._deriv[chart_id] = [
                [expr.compile_evaluator(expr.differentiate(ast, var), coords)
                 for var in coords]
                for ast in (re_ast, im_ast)]

    @classmethod
    def from_expressions(cls, surface, real_source, imag_source):
        parts = {}
        for chart in surface.charts:
            parts[chart.id] = (expr.parse(real_source, chart.coords),
                               expr.parse(imag_source, chart.coords))
        vf = cls(surface, parts)
        vf.sources = {"real": real_source, "imag": imag_source}
        return vf

    def value(self, chart_id, u, v):
        re_fn, im_fn = self._value[chart_id]
        with np.errstate(all="ignore"):
            out = np.asarray(re_fn(u, v) + 1j * im_fn(u, v), dtype=complex)
        return np.broadcast_to(out, np.shape(u)) if np.shape(u) else out

    def jacobian(self, chart_id, u, v):
        """Real derivative matrix [[re_u, re_v], [im_u, im_v]]."""
        u = np.asarray(u, dtype=float)
        d = self._deriv[chart_id]
        with np.errstate(all="ignore"):
            out = np.empty(u.shape + (2, 2))
            for i in (0, 1):
                for j in (0, 1):
                    out[..., i, j] = d[i][j](u, v)
        return out

    def dbar(self, chart_id, u, v):
        """(d/du f + i d/dv f)/2 with exact symbolic derivatives."""
        d = self._deriv[chart_id]
        with np.errstate(all="ignore"):
            re_u = d[0][0](u, v)
            re_v = d[0][1](u, v)
            im_u = d[1][0](u, v)
            im_v = d[1][1](u, v)
        out = np.asarray(0.5 * ((re_u - im_v) + 1j * (im_u + re_v)),
                         dtype=complex)
        return np.broadcast_to(out, np.shape(u)) if np.shape(u) else out

    def validate(self, tol=1e-9, samples=60):
        """Spot-check invariance under the periodic identifications."""
        rng = np.random.default_rng(0)
        for chart in self.surface.charts:
            if not isinstance(chart, TorusChart):
                continue
            u = rng.uniform(0.1, 0.7, samples)
            v = rng.uniform(0.1, 0.7, samples) * chart.tau.imag
            base = self.value(chart.id, u, v)
            for shift in (1.0, chart.tau):
                moved = self.value(chart.id, u + shift.real, v + shift.imag)
                err = np.abs(moved - base).max()
                if err > tol:
                    raise ValueError(
                        f"vector field is not doubly periodic (error {err:g})")


def dbar_section(field, g=None):
    """The antiholomorphic-derivative section of the field (all charts)."""
    surface = field.surface
    g = g or default_metric(surface)
    fns = {}
    for chart in surface.charts:
        _require_isothermal(g, chart)
        fns[chart.id] = (lambda u, v, cid=chart.id: field.dbar(cid, u, v))
    return EASection(surface, g, fns)


def conformal_points_of_field(field, g=None, tol=DEFAULT):
    """Zeros and indices of the antiholomorphic derivative of the field."""
    return locate_zeros_of_section(dbar_section(field, g), tol)


def verify_field_count_identity(field, g=None, tol=DEFAULT):
    """Count identity for the zeros of dbar f, with boundary windings."""
    from .counting import VerificationReport

    section = dbar_section(field, g)
    points = locate_zeros_of_section(section, tol)
    windings = boundary_windings(section, tol)
    lhs = algebraic_count(points)
    surface = field.surface
    rhs = 2 * surface.euler_characteristic + sum(windings)
    diagnostics = {"grid_n": tol.grid_n, "zero_tol": tol.zero_tol,
                   "n_zeros": len(points)}
    return VerificationReport(surface.kind, points, windings, lhs, rhs,
                              lhs == rhs, diagnostics)


# --- flow linearization --------------------------------------------------------

def _flow_with_jacobian(field, chart_id, p0, t, step=1e-3):
    """RK4 integration of the flow and its derivative from p0 for time t."""
    n = max(1, int(round(abs(t) / step)))
    dt = t / n
    pos = np.array(p0, dtype=float)
    J = np.eye(2)

    def rhs(state):
        p, M = state
        val = complex(field.value(chart_id, p[0], p[1]))
        X = np.array([val.real, val.imag])
        DX = field.jacobian(chart_id, p[0], p[1])
        return X, DX @ M

    for _ in range(n):
        k1 = rhs((pos, J))
        k2 = rhs((pos + dt / 2 * k1[0], J + dt / 2 * k1[1]))
        k3 = rhs((pos + dt / 2 * k2[0], J + dt / 2 * k2[1]))
        k4 = rhs((pos + dt * k3[0], J + dt * k3[1]))
        pos = pos + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        J = J + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return pos, J


def _pullback_rate(field, g, chart_id, chart, p, t, step=1e-3):
    """Frame components of the trace-free part of (flow_t^* g) at p, over t."""
    q, J = _flow_with_jacobian(field, chart_id, p, t, step=step)
    if not bool(chart.contains(q[0], q[1], slack=0.0)):
        raise HypothesisViolation(
            f"flow leaves the chart from ({p[0]:.3g}, {p[1]:.3g}) at t={t:g}")
    G_p = g.matrix(chart_id, p[0], p[1])
    G_q = g.matrix(chart_id, q[0], q[1])
    A = pullback_metric(J, G_q)
    Ha = trace_free(endo_of_tensor(G_p, A))
    val = complex(ea_components(Ha, frame_matrix(G_p), tol=1e-6))
    return val / t


def _seed_points(surface):
    chart = surface.charts[0]
    if isinstance(chart, TorusChart):
        s = np.linspace(0.15, 0.85, 4)
        pts = [(chart._M[0, 0] * a + chart._M[0, 1] * b,
                chart._M[1, 0] * a + chart._M[1, 1] * b)
               for a in s for b in s]
    else:
        s = np.linspace(-0.45, 0.45, 4)
        pts = [(a, b) for a in s for b in s
               if bool(chart.contains(a, b, slack=-0.2))]
    return pts


_KAPPA_CACHE = {}


def calibrate_linearization_constant(step=1e-3):
    """Proportionality constant between the pullback rate and dbar f.

    Calibrated once from the antiholomorphic oracle field f(z) = conj(z) on
    the Euclidean disc (dbar f = 1 there), with a Richardson step to strip
    the O(t^2) bias of the rate quotient.
    """
    if step in _KAPPA_CACHE:
        return _KAPPA_CACHE[step]
    from .surfaces import disc

    surface = disc()
    g = default_metric(surface)
    field = VectorField.from_expressions(surface, "u", "-v")
    chart = surface.charts[0]
    pts = _seed_points(surface)

    def kappa_at(t):
        vals = [_pullback_rate(field, g, chart.id, chart, p, t, step=step)
                for p in pts]
        return float(np.mean([v.real for v in vals]))

    t1, t2 = 2.5e-3, 5e-3
    kappa = (4 * kappa_at(t1) - kappa_at(t2)) / 3
    _KAPPA_CACHE[step] = kappa
    return kappa


def linearization_check(field, g=None, t_schedule=(1e-2, 5e-3, 2.5e-3),
                        step=1e-3):
    """Compare (flow_t^* g) trace-free rate against the dbar section.

    Returns a record with the calibration constant and the max-norm
    residuals over a seed grid for each t in the schedule; for smooth data
    the residual decays at order O(t).
    """
    surface = field.surface
    g = g or default_metric(surface)
    chart = surface.charts[0]
    _require_isothermal(g, chart)
    kappa = calibrate_linearization_constant(step=step)
    pts = _seed_points(surface)
    targets = [complex(field.dbar(chart.id, p[0], p[1])) for p in pts]
    residuals = []
    for t in sorted(t_schedule, reverse=True):
        errs = [abs(_pullback_rate(field, g, chart.id, chart, p, t, step=step)
                    - kappa * w)
                for p, w in zip(pts, targets)]
        residuals.append({"t": t, "max_residual": float(np.max(errs))})
    return {
        "kappa": kappa,
        "residuals": residuals,
        "decreasing": all(residuals[i + 1]["max_residual"]
                          <= residuals[i]["max_residual"] + 1e-12
                          for i in range(len(residuals) - 1)),
    }
