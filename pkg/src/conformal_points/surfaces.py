"""Catalog surfaces: charts, boundary components, transitions.

The catalog covers the unit disc, a planar annulus, a flat torus C/Gamma
with lattice generated by 1 and tau (Im tau > 0), and a genus-0 atlas made
of two stereographic-type charts glued by w -> 1/w.  Chart coordinates are
always named (u, v); for the torus they are the real and imaginary part of
the complex coordinate, wrapped into the fundamental parallelogram.

Boundary components are parametrized by theta in R/2piZ traversed in the
positive (induced) direction: with the outward normal nu and the unit
tangent tau along the curve, (nu, tau) is a positively oriented frame.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Chart", "DiscChart", "AnnulusChart", "TorusChart", "SpherePatchChart",
    "CircleBoundary", "Surface", "disc", "annulus", "torus", "sphere",
]


class GridScan:
    """Sample grid over a chart: coordinate arrays, validity mask, topology."""

    def __init__(self, u, v, mask, periodic):
        self.u = u
        self.v = v
        self.mask = mask
        self.periodic = periodic  # periodicity of the two grid axes


class Chart:
    coords = ("u", "v")

    def __init__(self, chart_id, rect):
        self.id = chart_id
        self.rect = rect  # (u0, u1, v0, v1)

    def scan_grid(self, n):
        u0, u1, v0, v1 = self.rect
        us = np.linspace(u0, u1, n)
        vs = np.linspace(v0, v1, n)
        U, V = np.meshgrid(us, vs, indexing="ij")
        return GridScan(U, V, self.contains(U, V), (False, False))

    def contains(self, u, v, slack=0.0):
        u0, u1, v0, v1 = self.rect
        return ((u >= u0 - slack) & (u <= u1 + slack)
                & (v >= v0 - slack) & (v <= v1 + slack))

    def owns(self, u, v):
        """Whether zeros at (u,v) are attributed to this chart (atlas partition)."""
        return np.ones_like(np.asarray(u, dtype=float), dtype=bool)

    def boundary_distance(self, u, v):
        return np.full_like(np.asarray(u, dtype=float), np.inf)

    def canonical(self, u, v):
        return u, v

    def distance(self, p, q):
        return float(np.hypot(p[0] - q[0], p[1] - q[1]))


class DiscChart(Chart):
    def __init__(self, chart_id="main"):
        super().__init__(chart_id, (-1.0, 1.0, -1.0, 1.0))

    def contains(self, u, v, slack=0.0):
        return np.hypot(u, v) <= 1.0 + slack

    def boundary_distance(self, u, v):
        return 1.0 - np.hypot(u, v)


class AnnulusChart(Chart):
    def __init__(self, inner_radius, chart_id="main"):
        super().__init__(chart_id, (-1.0, 1.0, -1.0, 1.0))
        self.inner_radius = float(inner_radius)

    def contains(self, u, v, slack=0.0):
        r = np.hypot(u, v)
        return (r >= self.inner_radius - slack) & (r <= 1.0 + slack)

    def boundary_distance(self, u, v):
        r = np.hypot(u, v)
        return np.minimum(r - self.inner_radius, 1.0 - r)


class TorusChart(Chart):
    """Fundamental parallelogram of C/(Z + tau Z) in coordinates z = u + iv."""

    def __init__(self, tau, chart_id="main"):
        tau = complex(tau)
        if tau.imag <= 0:
            raise ValueError("torus modulus must have positive imaginary part")
        self.tau = tau
        # lattice basis as columns of M: (1,0) and (Re tau, Im tau)
        self._M = np.array([[1.0, tau.real], [0.0, tau.imag]])
        self._Minv = np.linalg.inv(self._M)
        u_corners = [0.0, 1.0, tau.real, 1.0 + tau.real]
        super().__init__(chart_id, (min(u_corners), max(u_corners), 0.0, tau.imag))

    def scan_grid(self, n):
        s = np.linspace(0.0, 1.0, n, endpoint=False)
        t = np.linspace(0.0, 1.0, n, endpoint=False)
        S, T = np.meshgrid(s, t, indexing="ij")
        U = S * self._M[0, 0] + T * self._M[0, 1]
        V = S * self._M[1, 0] + T * self._M[1, 1]
        return GridScan(U, V, np.ones_like(U, dtype=bool), (True, True))

    def contains(self, u, v, slack=0.0):
        return np.ones_like(np.asarray(u, dtype=float), dtype=bool)

    def lattice_coords(self, u, v):
        s = self._Minv[0, 0] * u + self._Minv[0, 1] * v
        t = self._Minv[1, 0] * u + self._Minv[1, 1] * v
        return s, t

    def canonical(self, u, v):
        s, t = self.lattice_coords(u, v)
        s, t = s % 1.0, t % 1.0
        return (self._M[0, 0] * s + self._M[0, 1] * t,
                self._M[1, 0] * s + self._M[1, 1] * t)

    def distance(self, p, q):
        du, dv = p[0] - q[0], p[1] - q[1]
        best = np.inf
        for m in (-1, 0, 1):
            for n in (-1, 0, 1):
                su = du + m * self._M[0, 0] + n * self._M[0, 1]
                sv = dv + m * self._M[1, 0] + n * self._M[1, 1]
                best = min(best, float(np.hypot(su, sv)))
        return best


class SpherePatchChart(Chart):
    """Stereographic-type patch of a two-chart genus-0 atlas.

    Each patch is scanned on |w| <= 1.1 and owns zeros with |w| <= 1; the
    partner chart covers the rest, with the overlap band used only for
    deduplication.
    """

    SCAN_RADIUS = 1.1
    OWN_RADIUS = 1.0

    def __init__(self, chart_id):
        super().__init__(chart_id, (-1.1, 1.1, -1.1, 1.1))

    def scan_grid(self, n):
        grid = super().scan_grid(n)
        grid.mask &= np.hypot(grid.u, grid.v) <= self.SCAN_RADIUS
        return grid

    def contains(self, u, v, slack=0.0):
        return np.hypot(u, v) <= self.SCAN_RADIUS + 0.25 + slack

    def owns(self, u, v):
        return np.hypot(u, v) <= self.OWN_RADIUS + 1e-9


class CircleBoundary:
    """Boundary circle |p - center| = radius, traversed positively.

    ``clockwise=True`` is used for inner boundaries, where the induced
    orientation runs against the standard counterclockwise direction.
    """

    def __init__(self, chart_id, radius, clockwise=False, name="C1", center=(0.0, 0.0)):
        self.chart_id = chart_id
        self.radius = float(radius)
        self.sign = -1.0 if clockwise else 1.0
        self.name = name
        self.center = center

    def point(self, theta):
        a = self.sign * np.asarray(theta, dtype=float)
        return (self.center[0] + self.radius * np.cos(a),
                self.center[1] + self.radius * np.sin(a))

    def velocity(self, theta):
        a = self.sign * np.asarray(theta, dtype=float)
        return (-self.sign * self.radius * np.sin(a),
                self.sign * self.radius * np.cos(a))

    def locate(self, u, v):
        """Parameter of the closest boundary point.

        Must invert point(): frames at image points are looked up through
        it, so reparametrized subclasses have to override locate as well.
        """
        ang = np.arctan2(v - self.center[1], u - self.center[0])
        return (self.sign * ang) % (2 * np.pi)


class Surface:
    def __init__(self, kind, charts, euler_characteristic, boundary=(),
                 transitions=None, **params):
        self.kind = kind
        self.charts = list(charts)
        self._chart_map = {c.id: c for c in self.charts}
        self.euler_characteristic = int(euler_characteristic)
        self.boundary = list(boundary)
        self.transitions = transitions or {}
        self.params = params

    def chart(self, chart_id):
        return self._chart_map[chart_id]

    def transition(self, from_id, to_id):
        """(map, jacobian) pair for the overlap, or None for same chart."""
        if from_id == to_id:
            return None
        return self.transitions[(from_id, to_id)]

    def __repr__(self):
        return f"Surface(kind={self.kind!r}, chi={self.euler_characteristic})"


def disc():
    chart = DiscChart()
    return Surface("disc", [chart], 1,
                   boundary=[CircleBoundary(chart.id, 1.0, name="C1")])


def annulus(inner_radius=0.5):
    if not 0.0 < inner_radius < 1.0:
        raise ValueError("inner radius must lie in (0, 1)")
    chart = AnnulusChart(inner_radius)
    outer = CircleBoundary(chart.id, 1.0, clockwise=False, name="C1")
    inner = CircleBoundary(chart.id, inner_radius, clockwise=True, name="C2")
    return Surface("annulus", [chart], 0, boundary=[outer, inner],
                   inner_radius=inner_radius)


def torus(tau):
    chart = TorusChart(tau)
    return Surface("torus", [chart], 0, tau=complex(tau))


def _inversion(u, v):
    rho2 = u * u + v * v
    return u / rho2, -v / rho2


def _inversion_jacobian(u, v):
    rho2 = u * u + v * v
    rho4 = rho2 * rho2
    j11 = (v * v - u * u) / rho4
    j12 = -2.0 * u * v / rho4
    j21 = 2.0 * u * v / rho4
    j22 = (v * v - u * u) / rho4
    J = np.empty(np.shape(u) + (2, 2))
    J[..., 0, 0] = j11
    J[..., 0, 1] = j12
    J[..., 1, 0] = j21
    J[..., 1, 1] = j22
    return J


def sphere():
    """Round two-sphere as two stereographic charts glued by w -> 1/w."""
    a = SpherePatchChart("a")
    b = SpherePatchChart("b")
    transitions = {
        ("a", "b"): (_inversion, _inversion_jacobian),
        ("b", "a"): (_inversion, _inversion_jacobian),
    }
    return Surface("sphere", [a, b], 2, transitions=transitions)
