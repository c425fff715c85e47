"""Relative winding numbers, zero location, and indices of plane-bundle sections.

Windings are computed on the complex ratio of two nonvanishing sections, so
the result does not depend on the frame used to express their components.
Angle increments are accumulated stepwise; any step of pi/2 or more triggers
adaptive bisection of the parameter interval (up to a fixed depth), which
makes aliasing failures explicit instead of silent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT
from .errors import (
    NewtonDivergence,
    NonIsolatedZero,
    NonVanishingViolation,
    NumericalError,
    RefinementLimit,
    ZeroOnBoundary,
)

TWO_PI = 2.0 * np.pi

__all__ = [
    "Loop", "ConformalPoint", "accumulated_angle", "relative_winding",
    "winding_of_curve", "find_zeros", "certify_isolation", "index_of_zero",
    "algebraic_count", "locate_zeros_of_section",
]


@dataclass(frozen=True)
class Loop:
    """Closed parametrized curve theta in R/2piZ -> chart point."""

    chart_id: str
    point: object  # vectorized callable theta -> (u, v)

    def validate(self, tol=1e-12):
        p0 = np.asarray(self.point(0.0))
        p1 = np.asarray(self.point(TWO_PI))
        if np.max(np.abs(p1 - p0)) > tol:
            raise ValueError("loop is not closed")

    @classmethod
    def circle(cls, chart_id, center, radius):
        cu, cv = center

        def point(theta):
            theta = np.asarray(theta, dtype=float)
            return cu + radius * np.cos(theta), cv + radius * np.sin(theta)

        return cls(chart_id, point)


@dataclass(frozen=True)
class ConformalPoint:
    """Isolated zero of the section with its integer index."""

    chart_id: str
    u: float
    v: float
    index: int
    isolation_radius: float

    def to_dict(self):
        return {"chart": self.chart_id, "u": self.u, "v": self.v,
                "index": int(self.index),
                "isolation_radius": self.isolation_radius}


def accumulated_angle(fn, tol=DEFAULT, n0=None, step_bound=None):
    """Total continuous angle swept by the complex curve fn over [0, 2pi).

    ``fn`` must accept an array of parameters and return complex values;
    the curve is treated as closed (the value at 0 is reused for 2pi).
    Returns (total_angle, max_depth_used).
    """
    n0 = n0 or tol.winding_samples
    bound = step_bound or tol.step_bound
    theta = np.linspace(0.0, TWO_PI, n0, endpoint=False)
    z = np.asarray(fn(theta), dtype=complex)
    if np.any(np.abs(z) <= tol.activation_tol) or not np.all(np.isfinite(z)):
        raise NonVanishingViolation(
            "curve passes within activation tolerance of zero")
    ta = theta
    tb = np.concatenate([theta[1:], [TWO_PI]])
    za = z
    zb = np.concatenate([z[1:], [z[0]]])
    depth = 0
    while True:
        steps = np.angle(zb / za)
        bad = np.abs(steps) >= bound
        if not np.any(bad):
            return float(np.sum(steps)), depth
        depth += 1
        if depth > tol.max_refine_depth:
            raise RefinementLimit(
                f"cannot certify angle steps below {bound:g} after "
                f"{tol.max_refine_depth} refinements")
        tm = 0.5 * (ta[bad] + tb[bad])
        zm = np.asarray(fn(tm), dtype=complex)
        if np.any(np.abs(zm) <= tol.activation_tol) or not np.all(np.isfinite(zm)):
            raise NonVanishingViolation(
                "curve passes within activation tolerance of zero")
        ta = np.concatenate([ta[~bad], ta[bad], tm])
        tb = np.concatenate([tb[~bad], tm, tb[bad]])
        za = np.concatenate([za[~bad], za[bad], zm])
        zb = np.concatenate([zb[~bad], zm, zb[bad]])


def _as_integer_winding(total, tol):
    w = total / TWO_PI
    k = int(np.round(w))
    if abs(total - TWO_PI * k) > tol.integrality_tol:
        raise NumericalError(
            f"accumulated angle {total:.3e} is not an integer multiple of 2*pi")
    return k


def winding_of_curve(fn, tol=DEFAULT, n0=None, step_bound=None):
    """Winding number of a closed complex curve around the origin."""
    total, _ = accumulated_angle(fn, tol=tol, n0=n0, step_bound=step_bound)
    return _as_integer_winding(total, tol)


def relative_winding(s_fn, r_fn, tol=DEFAULT, n0=None):
    """Winding of the ratio s/r of two nonvanishing section components.

    Both sections must be expressed in one common frame along the loop; the
    ratio cancels the frame, so the integer is frame-independent.
    """

    def ratio(theta):
        s = np.asarray(s_fn(theta), dtype=complex)
        r = np.asarray(r_fn(theta), dtype=complex)
        if np.any(np.abs(s) <= tol.activation_tol) or \
           np.any(np.abs(r) <= tol.activation_tol):
            raise NonVanishingViolation(
                "section passes within activation tolerance of zero on the loop")
        return s / r

    return winding_of_curve(ratio, tol=tol, n0=n0)


# --- zero finding -----------------------------------------------------------

def _local_minima(m, periodic):
    """Local minima of the sampled modulus, and a local slope estimate.

    Ties are broken lexicographically (strict comparison against half of the
    neighbors), so plateaus do not flood the candidate list.  The slope is
    the largest finite neighbor increase, used to gate Newton seeds: a grid
    minimum can only hide a zero if its value is comparable to one cell of
    local variation.
    """
    n0, n1 = m.shape
    pad = np.full((n0 + 2, n1 + 2), np.inf)
    pad[1:-1, 1:-1] = m
    if periodic[0]:
        pad[0, 1:-1] = m[-1, :]
        pad[-1, 1:-1] = m[0, :]
    if periodic[1]:
        pad[1:-1, 0] = m[:, -1]
        pad[1:-1, -1] = m[:, 0]
    if periodic[0] and periodic[1]:
        pad[0, 0], pad[0, -1] = m[-1, -1], m[-1, 0]
        pad[-1, 0], pad[-1, -1] = m[0, -1], m[0, 0]
    is_min = np.ones_like(m, dtype=bool)
    slope = np.zeros_like(m)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nbr = pad[1 + di:n0 + 1 + di, 1 + dj:n1 + 1 + dj]
            if (dj, di) > (0, 0):
                is_min &= m < nbr
            else:
                is_min &= m <= nbr
            finite = np.isfinite(nbr) & np.isfinite(m)
            with np.errstate(invalid="ignore"):
                slope = np.where(finite, np.maximum(slope, nbr - m), slope)
    return is_min & np.isfinite(m), slope


def _newton_refine(section, chart, seed, tol, seed_spread=1e-2):
    """Newton on the components with central finite-difference Jacobian.

    A Levenberg-style damping term handles zeros where the Jacobian is
    singular (degenerate zeros, zero-winding factors): the step then falls
    back to a damped Gauss-Newton direction instead of blowing up.  A
    derivative-free compass polish finishes the position off; ``seed_spread``
    bounds how far the true zero may sit from the seed (one grid cell).
    """
    chart_id = chart.id
    x = np.array(seed, dtype=float)
    h = 1e-6
    lam = 0.0

    def value(p):
        return complex(section.components(chart_id, p[0], p[1]))

    f = value(x)
    f0 = abs(f)
    last_step = 0.0
    for it in range(tol.newton_max_iter):
        # stagnating seeds go straight to the derivative-free polish
        if it == 8 and abs(f) > max(0.5 * f0, 1e3 * tol.zero_tol):
            break
        fu = value(x + [h, 0.0]) - value(x - [h, 0.0])
        fv = value(x + [0.0, h]) - value(x - [0.0, h])
        J = np.array([[fu.real, fv.real], [fu.imag, fv.imag]]) / (2 * h)
        rhs = np.array([f.real, f.imag])
        JtJ = J.T @ J
        scale = np.trace(JtJ) / 2 + 1e-300
        accepted = False
        for _ in range(8):
            try:
                step = np.linalg.solve(JtJ + lam * scale * np.eye(2), -J.T @ rhs)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and np.all(np.isfinite(step)):
                xn = x + step
                if bool(chart.contains(xn[0], xn[1], slack=0.1)):
                    fn = value(xn)
                    if abs(fn) < abs(f) or abs(fn) < tol.zero_tol:
                        accepted = True
                        lam = max(lam / 4, 0.0) if lam > 1e-14 else 0.0
                        break
            lam = 1e-10 if lam == 0.0 else lam * 16
        if not accepted:
            break
        last_step = np.linalg.norm(step)
        converged = last_step < tol.newton_tol * (1 + np.linalg.norm(x))
        x, f = xn, fn
        if converged:
            break
    # polish the position: even-order zeros converge in residual long before
    # the location settles, and the Jacobian is useless there
    r0 = max(4 * last_step, 1e-9)
    if abs(f) >= tol.zero_tol:
        r0 = max(r0, seed_spread)
    x, f = _pattern_polish(value, chart, x, r0)
    return x, abs(f)


def _pattern_polish(value, chart, x, r0, budget=600):
    """Derivative-free compass descent on |s|; robust at degenerate zeros."""
    dirs = np.array([[1, 0], [-1, 0], [0, 1], [0, -1],
                     [1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
    dirs[4:] /= np.sqrt(2)
    best = abs(value(x))
    r = r0
    evals = 0
    while r > 1e-10 and evals < budget:
        moved = False
        for d in dirs:
            xn = x + r * d
            if not bool(chart.contains(xn[0], xn[1], slack=0.1)):
                continue
            fn = abs(value(xn))
            evals += 1
            if fn < best:
                x, best, moved = xn, fn, True
                break
        if not moved:
            r *= 0.5
    return x, value(x)


def find_zeros(section, chart, tol=DEFAULT):
    """Grid scan + Newton refinement of the section's zeros on one chart.

    Returns canonical (u, v) zero locations attributed to this chart.
    Raises NonIsolatedZero when the grid shows a whole locus of zeros.
    """
    grid = chart.scan_grid(tol.grid_n)
    comp = section.components(chart.id, grid.u, grid.v)
    mag = np.broadcast_to(np.abs(comp), grid.u.shape).copy()
    mag[~grid.mask] = np.inf
    mag[~np.isfinite(mag)] = np.inf

    owned = grid.mask & chart.owns(grid.u, grid.v)
    n_tiny = int(np.sum((mag < tol.zero_tol) & owned))
    if n_tiny > tol.degenerate_grid_count:
        raise NonIsolatedZero(
            f"{n_tiny} grid points lie below the zero tolerance; "
            "the zero set is not isolated")

    minima, slope = _local_minima(mag, grid.periodic)
    # a zero can only hide near a minimum whose value is at most a few cells
    # of local variation; this discards e.g. whole rings of boundary minima
    plausible = mag <= 8 * slope + 1e3 * tol.zero_tol
    seeds = np.argwhere(minima & plausible)
    if len(seeds) > 2048:
        raise NonIsolatedZero(
            f"{len(seeds)} zero candidates on one chart; the zero set does "
            "not look isolated")
    u0, u1, v0, v1 = chart.rect
    cell = max(u1 - u0, v1 - v0) / tol.grid_n
    zeros = []
    for i, j in seeds:
        seed_val = mag[i, j]
        result = _newton_refine(section, chart,
                                (grid.u[i, j], grid.v[i, j]), tol,
                                seed_spread=2 * cell)
        if result is None:
            if seed_val < 1e-6:
                raise NewtonDivergence(
                    f"refinement diverged from a near-zero seed at "
                    f"({grid.u[i, j]:.6g}, {grid.v[i, j]:.6g})")
            continue
        (zu, zv), residual = result
        if residual >= tol.zero_tol:
            if seed_val < 1e-8:
                raise NewtonDivergence(
                    f"refinement stalled at |s|={residual:g} from a "
                    f"near-zero seed")
            continue
        zu, zv = chart.canonical(zu, zv)
        if not bool(chart.owns(zu, zv)):
            continue
        zeros.append((float(zu), float(zv), float(residual)))
    # deduplicate, keeping the representative with the smallest residual
    zeros.sort(key=lambda z: z[2])
    kept = []
    for zu, zv, res in zeros:
        if all(chart.distance((zu, zv), (ku, kv)) > tol.dedup_radius
               for ku, kv, _ in kept):
            kept.append((zu, zv, res))
    return [(zu, zv) for zu, zv, _ in kept]


def certify_isolation(section, chart, center, r0, tol=DEFAULT, max_shrink=6):
    """Largest certified radius <= r0 whose circle avoids the zero tolerance."""
    r = r0
    theta = np.linspace(0.0, TWO_PI, tol.isolation_samples, endpoint=False)
    for _ in range(max_shrink + 1):
        pu = center[0] + r * np.cos(theta)
        pv = center[1] + r * np.sin(theta)
        m = np.abs(section.components(chart.id, pu, pv))
        if np.all(np.isfinite(m)) and np.min(m) > tol.activation_tol:
            return r
        r *= 0.5
    raise NonIsolatedZero(
        f"no isolation circle around ({center[0]:.6g}, {center[1]:.6g}): "
        f"|section| falls below activation tolerance at every tested radius")


def index_of_zero(section, chart, center, radius, tol=DEFAULT):
    """Winding of the section against the frame-constant section 1."""
    cu, cv = center

    def on_circle(theta):
        return section.components(chart.id, cu + radius * np.cos(theta),
                                  cv + radius * np.sin(theta))

    return relative_winding(on_circle, lambda theta: np.ones_like(theta,
                                                                  dtype=complex),
                            tol=tol)


def algebraic_count(points):
    return int(sum(p.index for p in points))


def locate_zeros_of_section(section, tol=DEFAULT):
    """Full pipeline over all charts: zeros, dedup across charts, indices.

    Raises ZeroOnBoundary when a zero sits within the boundary clearance of
    the surface boundary, NonIsolatedZero when isolation fails.
    """
    surface = section.surface
    per_chart = {}
    for chart in surface.charts:
        per_chart[chart.id] = find_zeros(section, chart, tol)

    # cross-chart dedup near the atlas overlap (two-chart atlases)
    if len(surface.charts) == 2:
        a, b = surface.charts
        trans = surface.transition(b.id, a.id)
        if trans is not None:
            tmap, _ = trans
            kept_b = []
            for zu, zv in per_chart[b.id]:
                if np.hypot(zu, zv) > 0.5:
                    mu, mv = tmap(np.asarray(zu), np.asarray(zv))
                    if any(a.distance((float(mu), float(mv)), pa) < 1e-5
                           for pa in per_chart[a.id]):
                        continue
                kept_b.append((zu, zv))
            per_chart[b.id] = kept_b

    points = []
    all_zeros = [(cid, z) for cid, zs in per_chart.items() for z in zs]
    for chart_id, (zu, zv) in all_zeros:
        chart = surface.chart(chart_id)
        bdist = float(chart.boundary_distance(zu, zv))
        if bdist < tol.boundary_clearance:
            raise ZeroOnBoundary(
                f"zero at ({zu:.6g}, {zv:.6g}) lies within {bdist:.2e} of the "
                "surface boundary; the count identity requires interior zeros")
        # isolation radius: half-distance to the nearest other zero, capped
        r0 = 0.08
        for other_id, (ou, ov) in all_zeros:
            if other_id == chart_id and (ou, ov) != (zu, zv):
                r0 = min(r0, 0.5 * chart.distance((zu, zv), (ou, ov)))
        if np.isfinite(bdist):
            r0 = min(r0, 0.5 * bdist)
        radius = certify_isolation(section, chart, (zu, zv), r0, tol)
        idx = index_of_zero(section, chart, (zu, zv), radius, tol)
        points.append(ConformalPoint(chart_id, zu, zv, idx, radius))
    points.sort(key=lambda p: (p.chart_id, p.u, p.v))
    return points
