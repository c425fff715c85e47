"""Metrics, tensor fields, frames, and the trace-free endomorphism machinery.

The central object is the plane-bundle section attached to a pair (g, h):
the endomorphism H with g(u, Hv) = h(u, v), stripped of its trace.  In a
positively oriented g-orthonormal frame that trace-free part has the shape

    [[a, b], [b, -a]]

and is stored as the single complex number a + i*b.  All operations accept
stacked inputs (arrays of shape (..., 2, 2)) so grid evaluation stays
vectorized.
"""

from __future__ import annotations

import numpy as np

from . import expr
from .errors import DegenerateMetric
from .surfaces import TorusChart

__all__ = [
    "endo_of_tensor", "trace_free", "orthonormal_frame", "frame_matrix",
    "ea_components", "ea_matrix", "complex_structure", "endo_split",
    "pullback_metric", "TensorField", "EASection", "default_metric",
    "boundary_frames", "reflection_matrix", "random_trig_tensorfield",
    "tensor_combination",
]

SPD_MIN_EIG = 1e-12
FRAME_TOL = 1e-10


def _entries(G):
    G = np.asarray(G, dtype=float)
    return G[..., 0, 0], G[..., 0, 1], G[..., 1, 1]


def _check_spd(g11, g12, g22):
    det = g11 * g22 - g12 * g12
    tr = g11 + g22
    # smaller eigenvalue of a symmetric 2x2 matrix
    lam_min = tr / 2 - np.sqrt(np.maximum((tr / 2) ** 2 - det, 0.0))
    if np.any(lam_min <= SPD_MIN_EIG):
        raise DegenerateMetric(
            f"metric is not positive-definite (min eigenvalue {np.min(lam_min):g})")
    return det


def endo_of_tensor(G, A):
    """Endomorphism H with g(u, Hv) = h(u, v), i.e. H = G^-1 A."""
    g11, g12, g22 = _entries(G)
    det = _check_spd(g11, g12, g22)
    A = np.asarray(A, dtype=float)
    a11, a12 = A[..., 0, 0], A[..., 0, 1]
    a21, a22 = A[..., 1, 0], A[..., 1, 1]
    H = np.empty(np.broadcast(G, A).shape)
    H[..., 0, 0] = (g22 * a11 - g12 * a21) / det
    H[..., 0, 1] = (g22 * a12 - g12 * a22) / det
    H[..., 1, 0] = (g11 * a21 - g12 * a11) / det
    H[..., 1, 1] = (g11 * a22 - g12 * a12) / det
    return H


def trace_free(H):
    H = np.asarray(H, dtype=float)
    half_tr = (H[..., 0, 0] + H[..., 1, 1]) / 2
    out = H.copy()
    out[..., 0, 0] = H[..., 0, 0] - half_tr
    out[..., 1, 1] = H[..., 1, 1] - half_tr
    return out


def frame_matrix(G, start="u"):
    """Positively oriented g-orthonormal frame as column matrix E = (e1 | e2).

    Gram-Schmidt on the coordinate frame, orthonormalizing the ``start``
    coordinate direction first; the result varies continuously over a chart.
    """
    g11, g12, g22 = _entries(G)
    det = _check_spd(g11, g12, g22)
    E = np.zeros(np.shape(np.asarray(G)))
    if start == "u":
        E[..., 0, 0] = 1.0 / np.sqrt(g11)
        E[..., 0, 1] = -g12 / np.sqrt(g11 * det)
        E[..., 1, 1] = np.sqrt(g11 / det)
    elif start == "v":
        # start from the v direction; second vector sign keeps det(E) > 0
        E[..., 1, 0] = 1.0 / np.sqrt(g22)
        E[..., 0, 1] = -np.sqrt(g22 / det)
        E[..., 1, 1] = g12 / np.sqrt(g22 * det)
    else:
        raise ValueError("frame start must be 'u' or 'v'")
    return E


def orthonormal_frame(G, start="u"):
    """The frame as a pair of coordinate vectors (e1, e2)."""
    E = frame_matrix(G, start=start)
    return E[..., :, 0], E[..., :, 1]


def _mat_mul(A, B):
    return np.einsum("...ij,...jk->...ik", A, B)


def _mat_inv2(E):
    det = E[..., 0, 0] * E[..., 1, 1] - E[..., 0, 1] * E[..., 1, 0]
    out = np.empty_like(E)
    out[..., 0, 0] = E[..., 1, 1] / det
    out[..., 0, 1] = -E[..., 0, 1] / det
    out[..., 1, 0] = -E[..., 1, 0] / det
    out[..., 1, 1] = E[..., 0, 0] / det
    return out


def ea_components(H, E, tol=FRAME_TOL):
    """Components a + i*b of a trace-free g-symmetric endomorphism in frame E.

    Raises if H fails the trace-free/symmetry tolerance in that frame.
    """
    F = _mat_mul(_mat_inv2(E), _mat_mul(np.asarray(H, dtype=float), E))
    scale = 1.0 + np.abs(F).max()
    if np.any(np.abs(F[..., 0, 0] + F[..., 1, 1]) > tol * scale) or \
       np.any(np.abs(F[..., 0, 1] - F[..., 1, 0]) > tol * scale):
        raise ValueError("endomorphism is not trace-free g-symmetric "
                         "within tolerance")
    return F[..., 0, 0] + 1j * F[..., 0, 1]


def ea_matrix(value, E):
    """Inverse of ea_components: coordinate matrix of the frame value a + i*b."""
    value = np.asarray(value, dtype=complex)
    F = np.empty(value.shape + (2, 2))
    F[..., 0, 0] = value.real
    F[..., 0, 1] = value.imag
    F[..., 1, 0] = value.imag
    F[..., 1, 1] = -value.real
    return _mat_mul(E, _mat_mul(F, _mat_inv2(E)))


def complex_structure(G):
    """Rotation by +90 degrees for g and the chart orientation (j^2 = -I)."""
    E = frame_matrix(G)
    J0 = np.array([[0.0, -1.0], [1.0, 0.0]])
    return _mat_mul(E, _mat_mul(np.broadcast_to(J0, E.shape), _mat_inv2(E)))


def endo_split(M, j):
    """Split M into parts commuting and anticommuting with j."""
    M = np.asarray(M, dtype=float)
    jMj = _mat_mul(j, _mat_mul(M, j))
    commuting = (M - jMj) / 2
    anticommuting = (M + jMj) / 2
    return commuting, anticommuting


def pullback_metric(dF, G_target):
    """dF^T G(F(p)) dF, the coordinate matrix of the pulled-back metric."""
    dF = np.asarray(dF, dtype=float)
    dFT = np.swapaxes(dF, -1, -2)
    return _mat_mul(dFT, _mat_mul(np.asarray(G_target, dtype=float), dF))


# --- tensor fields ---------------------------------------------------------

class TensorField:
    """Symmetric 2x2 tensor field: per chart, a map (u, v) -> 3 entries.

    Only the entries (t11, t12, t22) are stored, so symmetry is structural.
    Entry functions must broadcast over numpy arrays.
    """

    def __init__(self, surface, entry_fns, role="general", exprs=None):
        self.surface = surface
        self.entry_fns = dict(entry_fns)
        self.role = role
        self.exprs = exprs  # chart -> 3 source strings, when available

    @classmethod
    def from_expressions(cls, surface, entries, role="general"):
        """entries: 3 source strings (single chart) or {chart_id: 3 strings}."""
        if not isinstance(entries, dict):
            entries = {chart.id: entries for chart in surface.charts}
        fns = {}
        for chart_id, sources in entries.items():
            chart = surface.chart(chart_id)
            asts = [expr.parse(s, chart.coords) for s in sources]
            fns[chart_id] = _expr_entry_fn(asts, chart.coords)
        return cls(surface, fns, role=role,
                   exprs={k: tuple(v) for k, v in entries.items()})

    @classmethod
    def constant(cls, surface, matrix, role="general"):
        m11, m12, m22 = float(matrix[0][0]), float(matrix[0][1]), float(matrix[1][1])

        def fn(u, v):
            shape = np.shape(u)
            return (np.full(shape, m11), np.full(shape, m12), np.full(shape, m22))

        return cls(surface, {c.id: fn for c in surface.charts}, role=role)

    def entries(self, chart_id, u, v):
        t11, t12, t22 = self.entry_fns[chart_id](np.asarray(u, dtype=float),
                                                 np.asarray(v, dtype=float))
        return (np.asarray(t11, dtype=float), np.asarray(t12, dtype=float),
                np.asarray(t22, dtype=float))

    def matrix(self, chart_id, u, v):
        t11, t12, t22 = self.entries(chart_id, u, v)
        out = np.empty(np.shape(t11) + (2, 2))
        out[..., 0, 0] = t11
        out[..., 0, 1] = t12
        out[..., 1, 0] = t12
        out[..., 1, 1] = t22
        return out

    def validate_metric(self, samples=24):
        """Sample positive-definiteness on every chart."""
        for chart in self.surface.charts:
            grid = chart.scan_grid(samples)
            u, v = grid.u[grid.mask], grid.v[grid.mask]
            g11, g12, g22 = self.entries(chart.id, u, v)
            _check_spd(g11, g12, g22)

    def check_compatibility(self, tol=1e-9, samples=120):
        """Spot-check agreement across periodic identifications and overlaps."""
        rng = np.random.default_rng(0)
        for chart in self.surface.charts:
            if isinstance(chart, TorusChart):
                u = rng.uniform(0.2, 0.8, samples)
                v = rng.uniform(0.2, 0.8, samples) * chart.tau.imag
                base = np.stack(self.entries(chart.id, u, v))
                for shift in (1.0, chart.tau):
                    moved = np.stack(self.entries(chart.id, u + shift.real,
                                                  v + shift.imag))
                    err = np.abs(moved - base).max()
                    if err > tol:
                        raise ValueError(
                            f"field is not periodic on the torus (error {err:g})")
        for (fid, tid), (tmap, tjac) in self.surface.transitions.items():
            theta = rng.uniform(0, 2 * np.pi, samples)
            r = rng.uniform(0.95, 1.05, samples)
            u, v = r * np.cos(theta), r * np.sin(theta)
            up, vp = tmap(u, v)
            J = tjac(u, v)
            pulled = pullback_metric(J, self.matrix(tid, up, vp))
            here = self.matrix(fid, u, v)
            err = np.abs(pulled - here).max()
            if err > tol:
                raise ValueError(
                    f"field disagrees across charts {fid}->{tid} (error {err:g})")


def _expr_entry_fn(asts, coords):
    compiled = [expr.compile_evaluator(a, coords) for a in asts]

    def fn(u, v):
        with np.errstate(all="ignore"):
            return tuple(c(u, v) for c in compiled)

    return fn


def tensor_combination(a, b, ca=1.0, cb=1.0, role="general"):
    """Pointwise combination ca*a + cb*b of two tensor fields."""
    fns = {}
    for chart_id in a.entry_fns:
        fa, fb = a.entry_fns[chart_id], b.entry_fns[chart_id]

        def fn(u, v, fa=fa, fb=fb):
            xa = fa(u, v)
            xb = fb(u, v)
            return tuple(ca * pa + cb * pb for pa, pb in zip(xa, xb))

        fns[chart_id] = fn
    return TensorField(a.surface, fns, role=role)


def default_metric(surface):
    """The catalog metric: flat for disc/annulus/torus, round for the sphere."""
    if surface.kind in ("disc", "annulus", "torus"):
        return TensorField.constant(surface, [[1.0, 0.0], [0.0, 1.0]], role="metric")
    if surface.kind == "sphere":
        def round_metric(u, v):
            lam = 4.0 / (1.0 + u * u + v * v) ** 2
            return lam, np.zeros_like(lam), lam

        return TensorField(surface, {c.id: round_metric for c in surface.charts},
                           role="metric")
    raise ValueError(f"no default metric for surface kind {surface.kind!r}")


# --- the trace-free endomorphism section -----------------------------------

class EASection:
    """Section of the trace-free g-symmetric endomorphism bundle.

    Values are complex numbers a + i*b: the components of the endomorphism
    in the positively oriented g-orthonormal frame of the chart.
    """

    def __init__(self, surface, g, component_fns, frame="u"):
        self.surface = surface
        self.g = g
        self.component_fns = dict(component_fns)
        self.frame = frame

    @classmethod
    def from_tensor_pair(cls, surface, g, h, frame="u"):
        fns = {}
        for chart in surface.charts:
            fns[chart.id] = _pair_component_fn(g, h, chart.id, frame)
        return cls(surface, g, fns, frame=frame)

    @classmethod
    def from_complex_fn(cls, surface, g, fn, frame="u"):
        """Section given directly by frame components (all charts share fn)."""
        if not isinstance(fn, dict):
            fn = {c.id: fn for c in surface.charts}
        return cls(surface, g, fn, frame=frame)

    def components(self, chart_id, u, v):
        return np.asarray(
            self.component_fns[chart_id](np.asarray(u, dtype=float),
                                         np.asarray(v, dtype=float)),
            dtype=complex)

    def matrix(self, chart_id, u, v):
        """Coordinate matrix of the section at (u, v)."""
        val = self.components(chart_id, u, v)
        E = frame_matrix(self.g.matrix(chart_id, u, v), start=self.frame)
        return ea_matrix(val, E)


def _pair_component_fn(g, h, chart_id, frame):
    def fn(u, v):
        g11, g12, g22 = g.entries(chart_id, u, v)
        h11, h12, h22 = h.entries(chart_id, u, v)
        det = g11 * g22 - g12 * g12
        H11 = (g22 * h11 - g12 * h12) / det
        H12 = (g22 * h12 - g12 * h22) / det
        H21 = (g11 * h12 - g12 * h11) / det
        H22 = (g11 * h22 - g12 * h12) / det
        M11 = (H11 - H22) / 2
        if frame == "u":
            a = M11 + (g12 / g11) * H21
            b = (g11 * H12 - 2 * g12 * M11 - (g12 * g12 / g11) * H21) / np.sqrt(det)
            return a + 1j * b
        # generic frame path (used for the frame-independence cross-check)
        G = np.empty(np.shape(g11) + (2, 2))
        G[..., 0, 0], G[..., 0, 1] = g11, g12
        G[..., 1, 0], G[..., 1, 1] = g12, g22
        M = np.empty_like(G)
        M[..., 0, 0], M[..., 0, 1] = M11, H12
        M[..., 1, 0], M[..., 1, 1] = H21, -M11
        E = frame_matrix(G, start=frame)
        F = _mat_mul(_mat_inv2(E), _mat_mul(M, E))
        return F[..., 0, 0] + 1j * F[..., 0, 1]

    return fn


# --- boundary frames and reflections ----------------------------------------

def boundary_frames(g, component, theta):
    """(nu, tau) along a boundary component: outward normal, unit tangent.

    tau is the g-unit velocity of the positive parametrization and nu = -j tau,
    so (nu, tau) is a positively oriented g-orthonormal frame.
    """
    pu, pv = component.point(theta)
    wu, wv = component.velocity(theta)
    G = g.matrix(component.chart_id, pu, pv)
    g11, g12, g22 = _entries(G)
    norm = np.sqrt(g11 * wu * wu + 2 * g12 * wu * wv + g22 * wv * wv)
    tau = np.stack([wu / norm, wv / norm], axis=-1)
    j = complex_structure(G)
    nu = -np.einsum("...ij,...j->...i", j, tau)
    return nu, tau


def reflection_matrix(G, nu, tau):
    """Reflection along the tau line: fixes tau, flips nu (g-symmetric, trace-free)."""
    Gnu = np.einsum("...ij,...j->...i", np.asarray(G, dtype=float), nu)
    Gtau = np.einsum("...ij,...j->...i", np.asarray(G, dtype=float), tau)
    return (np.einsum("...i,...j->...ij", tau, Gtau)
            - np.einsum("...i,...j->...ij", nu, Gnu))


def boundary_reflection_section(g, component):
    """theta -> frame components of the boundary-tangent reflection."""
    chart_id = component.chart_id

    def fn(theta):
        pu, pv = component.point(theta)
        G = g.matrix(chart_id, pu, pv)
        nu, tau = boundary_frames(g, component, theta)
        R = reflection_matrix(G, nu, tau)
        E = frame_matrix(G)
        return ea_components(R, E)

    return fn


def section_on_boundary(section, component):
    """theta -> frame components of an EASection along a boundary component."""

    def fn(theta):
        pu, pv = component.point(theta)
        return section.components(component.chart_id, pu, pv)

    return fn


# --- random doubly periodic test fields --------------------------------------

def random_trig_tensorfield(surface, degree=3, seed=0, amplitude=1.0):
    """Seeded random trigonometric-polynomial tensor field on the flat torus.

    Entries are real trigonometric polynomials in the lattice coordinates,
    so double periodicity holds by construction.  Returns the field built
    from generated expression strings (deterministic for a fixed seed).
    """
    chart = surface.charts[0]
    if not isinstance(chart, TorusChart):
        raise ValueError("random trigonometric fields are defined on the torus")
    rng = np.random.default_rng(seed)
    tau = chart.tau
    # lattice coordinates as expressions in u, v
    s_src = f"(u - {tau.real / tau.imag!r}*v)"
    t_src = f"({1.0 / tau.imag!r}*v)"
    modes = [(m, n) for m in range(0, degree + 1)
             for n in range(-degree, degree + 1)
             if (m > 0 or n > 0) and abs(m) + abs(n) <= degree]
    sources = []
    for _ in range(3):
        terms = [repr(float(rng.normal(0.0, 0.3 * amplitude)))]
        for m, n in modes:
            phase = f"2*pi*({m}*{s_src} + {n}*{t_src})"
            ca = float(rng.normal(0.0, amplitude / (1 + m * m + n * n)))
            cb = float(rng.normal(0.0, amplitude / (1 + m * m + n * n)))
            terms.append(f"{ca!r}*cos({phase})")
            terms.append(f"{cb!r}*sin({phase})")
        sources.append(" + ".join(terms))
    return TensorField.from_expressions(surface, tuple(sources), role="general")
