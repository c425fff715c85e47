"""Locate conformal points and check the index-count identity.

For a metric g and a symmetric two-tensor field h on a compact oriented
surface, the conformal points of (g, h) are the zeros of the trace-free
endomorphism section built from the pair.  When those zeros are finite and
interior, the algebraic count satisfies

    sum of indices = 2*chi + sum of boundary windings,

where the boundary winding of a component is taken relative to the
reflection along the boundary tangent line.  This module verifies the
identity end to end and, on the disc and the annulus, constructs a field
realizing arbitrarily prescribed zeros, indices, and windings consistent
with it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT
from .errors import DataMismatch, UnsupportedSurface
from .geometry import (
    EASection,
    boundary_reflection_section,
    default_metric,
    ea_matrix,
    frame_matrix,
    section_on_boundary,
)
from .winding import (
    algebraic_count,
    locate_zeros_of_section,
    relative_winding,
    ConformalPoint,
)

__all__ = [
    "conformal_points", "boundary_windings", "VerificationReport",
    "verify_count_identity", "cap_off_index", "PrescribedData",
    "realize_prescribed", "random_prescribed_data", "realization_roundtrip",
]


def conformal_points(g, h, surface, tol=DEFAULT, frame="u"):
    """Zeros of the trace-free part of the endomorphism representing h against g."""
    section = EASection.from_tensor_pair(surface, g, h, frame=frame)
    return locate_zeros_of_section(section, tol)


def boundary_windings(section, tol=DEFAULT):
    """Relative winding of the section against the tangent reflection, per component."""
    windings = []
    for comp in section.surface.boundary:
        s_fn = section_on_boundary(section, comp)
        r_fn = boundary_reflection_section(section.g, comp)
        windings.append(relative_winding(s_fn, r_fn, tol=tol))
    return windings


@dataclass
class VerificationReport:
    surface_kind: str
    points: list
    windings: list
    lhs: int
    rhs: int
    passed: bool
    diagnostics: dict

    def to_dict(self):
        return {
            "surface": self.surface_kind,
            "conformal_points": [p.to_dict() for p in self.points],
            "boundary_windings": [int(w) for w in self.windings],
            "algebraic_count": int(self.lhs),
            "expected_count": int(self.rhs),
            "identity_holds": bool(self.passed),
            "diagnostics": self.diagnostics,
        }


def verify_count_identity(g, h, surface, tol=DEFAULT, frame="u"):
    """Full verification: locate zeros, index them, wind the boundary, compare."""
    section = EASection.from_tensor_pair(surface, g, h, frame=frame)
    points = locate_zeros_of_section(section, tol)
    windings = boundary_windings(section, tol)
    lhs = algebraic_count(points)
    rhs = 2 * surface.euler_characteristic + sum(windings)
    diagnostics = {
        "grid_n": tol.grid_n,
        "zero_tol": tol.zero_tol,
        "activation_tol": tol.activation_tol,
        "boundary_clearance": tol.boundary_clearance,
        "n_zeros": len(points),
    }
    return VerificationReport(surface.kind, points, windings, lhs, rhs,
                              lhs == rhs, diagnostics)


def cap_off_index(w):
    """Index carried by the center of a disc capping a boundary of winding w.

    Filling a boundary component with a disc turns the boundary winding into
    an interior zero; the tangent line of a circle rotates twice per loop,
    which offsets the winding to an index of 2 - w.
    """
    return 2 - int(w)


# --- realization of prescribed data -----------------------------------------

@dataclass
class PrescribedData:
    """Target zeros with integer indices plus per-boundary windings."""

    points: list   # [(u, v), ...], interior points
    indices: list  # integers, one per point
    windings: list # integers, one per boundary component

    def validate(self, surface, margin=1e-3):
        if len(self.points) != len(self.indices):
            raise DataMismatch("one index is required per prescribed point")
        if len(self.windings) != len(surface.boundary):
            raise DataMismatch(
                f"{len(surface.boundary)} boundary windings required, "
                f"got {len(self.windings)}")
        chart = surface.charts[0]
        for i, (u, v) in enumerate(self.points):
            if float(chart.boundary_distance(u, v)) < margin:
                raise DataMismatch(
                    f"prescribed point {i} is not interior with margin {margin:g}")
            for j in range(i):
                if chart.distance((u, v), self.points[j]) < margin:
                    raise DataMismatch(
                        f"prescribed points {j} and {i} are not distinct")
        lhs = sum(int(k) for k in self.indices)
        rhs = 2 * surface.euler_characteristic + sum(int(w) for w in self.windings)
        if lhs != rhs:
            raise DataMismatch(
                f"prescribed data violates the count identity: "
                f"sum of indices {lhs} != 2*chi + sum of windings {rhs}")


def _zero_factor_section(points, indices, monomial_power):
    """Complex section z -> prod (z - z_k)^{i_k}, conjugated for negative i_k.

    Zero-index points contribute |z - z_k|^2: a zero whose winding is 0.
    A central monomial z^p distributes winding between the two boundary
    circles of an annulus.
    """
    zs = [complex(p[0], p[1]) for p in points]

    def section(z):
        out = np.ones_like(np.asarray(z, dtype=complex))
        for zk, k in zip(zs, indices):
            w = z - zk
            if k > 0:
                out = out * w ** k
            elif k < 0:
                out = out * np.conj(w) ** (-k)
            else:
                out = out * (w * np.conj(w))
        if monomial_power:
            out = out * np.asarray(z, dtype=complex) ** monomial_power
        return out

    return section


def realize_prescribed(surface, data, g=None, margin=1e-3):
    """Tensor field h whose conformal points against g reproduce ``data``.

    Supported on the disc and the annulus.  The section is a product of
    holomorphic/antiholomorphic zero factors; on the annulus an extra
    central monomial fixes the split of winding between the two boundary
    circles (the capping relation gives its exponent).  The realized h is
    trace-free: adding any multiple of g would not change its zeros.
    """
    if surface.kind not in ("disc", "annulus"):
        raise UnsupportedSurface(
            f"realization is implemented on the disc and the annulus, "
            f"not on {surface.kind!r}")
    data.validate(surface, margin=margin)
    g = g or default_metric(surface)
    power = 0
    if surface.kind == "annulus":
        power = cap_off_index(data.windings[1])
    section = _zero_factor_section(data.points, data.indices, power)
    chart = surface.charts[0]

    def entries(u, v):
        z = np.asarray(u, dtype=float) + 1j * np.asarray(v, dtype=float)
        val = section(z)
        G = g.matrix(chart.id, u, v)
        S = ea_matrix(val, frame_matrix(G))
        A = np.einsum("...ij,...jk->...ik", G, S)
        return A[..., 0, 0], A[..., 0, 1], A[..., 1, 1]

    from .geometry import TensorField
    return TensorField(surface, {chart.id: entries}, role="general")


def random_prescribed_data(surface, seed=0, max_points=4, max_index=3,
                           max_winding=4):
    """Seeded admissible prescribed data, spaced for reliable re-detection."""
    rng = np.random.default_rng(seed)
    chart = surface.charts[0]
    inner = surface.params.get("inner_radius", 0.0)
    while True:
        n = int(rng.integers(0, max_points + 1))
        pts = []
        attempts = 0
        while len(pts) < n and attempts < 200:
            attempts += 1
            r = rng.uniform(inner + 0.15, 0.82)
            th = rng.uniform(0, 2 * np.pi)
            cand = (r * np.cos(th), r * np.sin(th))
            if all(chart.distance(cand, p) > 0.25 for p in pts):
                pts.append(cand)
        indices = [int(k) for k in rng.integers(-max_index, max_index + 1,
                                                len(pts))]
        total = sum(indices)
        if surface.kind == "disc":
            w = [total - 2]
            if abs(w[0]) > max_winding:
                continue
        else:
            lo = max(-max_winding, total - max_winding)
            hi = min(max_winding, total + max_winding)
            if lo > hi:
                continue
            w2 = int(rng.integers(lo, hi + 1))
            w = [total - w2, w2]
        data = PrescribedData([(float(u), float(v)) for u, v in pts],
                              indices, w)
        try:
            data.validate(surface)
        except DataMismatch:
            continue
        return data


def realization_roundtrip(surface, data, tol=DEFAULT, position_tol=1e-6):
    """Realize data, re-run the detection pipeline, and compare exactly.

    Returns (h, report, mismatches); empty mismatch list means every index
    and winding was reproduced and the count identity holds.
    """
    g = default_metric(surface)
    h = realize_prescribed(surface, data)
    report = verify_count_identity(g, h, surface, tol=tol)
    mismatches = []
    if not report.passed:
        mismatches.append("count identity failed on the realized field")
    if list(report.windings) != [int(w) for w in data.windings]:
        mismatches.append(
            f"boundary windings {report.windings} != prescribed {data.windings}")
    detected = list(report.points)
    if len(detected) != len(data.points):
        mismatches.append(
            f"{len(detected)} zeros detected, {len(data.points)} prescribed")
    else:
        chart = surface.charts[0]
        for (pu, pv), idx in zip(data.points, data.indices):
            match = None
            for cp in detected:
                if chart.distance((cp.u, cp.v), (pu, pv)) < position_tol:
                    match = cp
                    break
            if match is None:
                mismatches.append(f"no zero detected near ({pu:.4f}, {pv:.4f})")
            elif match.index != int(idx):
                mismatches.append(
                    f"index {match.index} != prescribed {idx} at "
                    f"({pu:.4f}, {pv:.4f})")
    return h, report, mismatches
