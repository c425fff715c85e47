"""Fundamental forms of parametrized surfaces and umbilical points.

An umbilical point of an embedded surface is a point where the two
principal curvatures coincide, i.e. where the second fundamental form is
conformal to the first.  Feeding the two forms through the conformal-point
machinery locates umbilics, computes their indices, and checks that the
algebraic count equals 4 on any (non-round) ellipsoid.

Ellipsoids are covered by two stereographic-type patches about the poles of
the z-axis (put the longest semi-axis there), glued over an equatorial band
by w -> 1/w.  All derivatives entering the forms are symbolic.
"""

from __future__ import annotations

import numpy as np

from . import expr
from .config import DEFAULT
from .counting import verify_count_identity
from .errors import DegenerateUmbilicLocus, NonIsolatedZero
from .geometry import TensorField
from .surfaces import Surface, SpherePatchChart, _inversion, _inversion_jacobian

__all__ = [
    "EmbeddedPatch", "fundamental_forms", "ellipsoid_surface",
    "fundamental_tensorfields", "umbilics",
]


class EmbeddedPatch:
    """Parametrized patch rho(u, v) in R^3 with symbolic derivatives."""

    def __init__(self, sources, coords=("u", "v")):
        self.sources = tuple(sources)
        self.coords = coords
        asts = [expr.parse(s, coords) for s in sources]
        d_u = [expr.differentiate(a, coords[0]) for a in asts]
        d_v = [expr.differentiate(a, coords[1]) for a in asts]
        d_uu = [expr.differentiate(a, coords[0]) for a in d_u]
        d_uv = [expr.differentiate(a, coords[1]) for a in d_u]
        d_vv = [expr.differentiate(a, coords[1]) for a in d_v]
        comp = lambda lst: [expr.compile_evaluator(a, coords) for a in lst]
        self._pos = comp(asts)
        self._du = comp(d_u)
        self._dv = comp(d_v)
        self._duu = comp(d_uu)
        self._duv = comp(d_uv)
        self._dvv = comp(d_vv)

    def _stack(self, fns, u, v):
        with np.errstate(all="ignore"):
            return np.stack([np.broadcast_to(f(u, v), np.shape(u)) if np.shape(u)
                             else np.asarray(f(u, v), dtype=float)
                             for f in fns], axis=-1)

    def position(self, u, v):
        return self._stack(self._pos, u, v)

    def tangents(self, u, v):
        return self._stack(self._du, u, v), self._stack(self._dv, u, v)

    def normal(self, u, v):
        ru, rv = self.tangents(u, v)
        n = np.cross(ru, rv)
        norm = np.linalg.norm(n, axis=-1, keepdims=True)
        return n / norm

    def first_form(self, u, v):
        ru, rv = self.tangents(u, v)
        return (np.sum(ru * ru, axis=-1), np.sum(ru * rv, axis=-1),
                np.sum(rv * rv, axis=-1))

    def second_form(self, u, v):
        n = self.normal(u, v)
        ruu = self._stack(self._duu, u, v)
        ruv = self._stack(self._duv, u, v)
        rvv = self._stack(self._dvv, u, v)
        return (np.sum(ruu * n, axis=-1), np.sum(ruv * n, axis=-1),
                np.sum(rvv * n, axis=-1))

    def immersion_defect(self, u, v):
        """Norm of the tangent cross product; zero means a degenerate point."""
        ru, rv = self.tangents(u, v)
        return np.linalg.norm(np.cross(ru, rv), axis=-1)


def fundamental_forms(patch, point):
    """(first form, second form) as 2x2 matrices at a single point."""
    u, v = point
    defect = float(patch.immersion_defect(u, v))
    if defect < 1e-12:
        raise ValueError(f"parametrization degenerates at {point}")
    g11, g12, g22 = patch.first_form(u, v)
    h11, h12, h22 = patch.second_form(u, v)
    G = np.array([[g11, g12], [g12, g22]], dtype=float)
    Hm = np.array([[h11, h12], [h12, h22]], dtype=float)
    return G, Hm


def ellipsoid_surface(semi_axes):
    """Two-chart atlas of the ellipsoid x^2/p^2 + y^2/q^2 + z^2/r^2 = 1.

    Chart "a" is centered at the south pole, chart "b" at the north pole;
    each covers past the equator (|w| <= 1.1) and owns |w| <= 1.  The
    transition w -> 1/w is holomorphic, so the atlas is oriented.
    """
    p, q, r = (float(x) for x in semi_axes)
    d = "(1 + u^2 + v^2)"
    rho2 = "(u^2 + v^2)"
    patches = {
        "a": EmbeddedPatch((f"{p!r}*2*u/{d}", f"{q!r}*2*v/{d}",
                            f"{r!r}*({rho2} - 1)/{d}")),
        "b": EmbeddedPatch((f"{p!r}*2*u/{d}", f"{q!r}*(-2)*v/{d}",
                            f"{r!r}*(1 - {rho2})/{d}")),
    }
    charts = [SpherePatchChart("a"), SpherePatchChart("b")]
    transitions = {
        ("a", "b"): (_inversion, _inversion_jacobian),
        ("b", "a"): (_inversion, _inversion_jacobian),
    }
    return Surface("embedded-genus0", charts, 2, transitions=transitions,
                   semi_axes=(p, q, r), patches=patches)


def fundamental_tensorfields(surface):
    """First and second fundamental forms of an atlas of embedded patches."""
    patches = surface.params["patches"]
    g_fns = {cid: patch.first_form for cid, patch in patches.items()}
    h_fns = {cid: patch.second_form for cid, patch in patches.items()}
    g = TensorField(surface, g_fns, role="metric")
    h = TensorField(surface, h_fns, role="general")
    return g, h


def umbilics(semi_axes, tol=DEFAULT):
    """Locate the umbilical points of an ellipsoid and verify their count.

    The algebraic count must equal 4 (twice the Euler characteristic of the
    sphere).  The round sphere is rejected: every point is umbilical there.
    """
    p, q, r = (float(x) for x in semi_axes)
    if p == q == r:
        raise DegenerateUmbilicLocus(
            "the round sphere is umbilical everywhere; no isolated umbilics")
    surface = ellipsoid_surface((p, q, r))
    g, h = fundamental_tensorfields(surface)
    try:
        return verify_count_identity(g, h, surface, tol=tol)
    except NonIsolatedZero as exc:
        raise DegenerateUmbilicLocus(
            f"umbilical locus of the ellipsoid {semi_axes} is not isolated"
        ) from exc
