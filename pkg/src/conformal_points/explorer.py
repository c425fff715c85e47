"""Search for disc functions vanishing on the boundary whose
antiholomorphic derivative stays away from zero.

Candidates have the form f(z) = (1 - |z|^2) * p(z, conj z) with p a complex
polynomial of bidegree d, so the boundary condition f = 0 on |z| = 1 is
exact by construction and

    dbar f = -z * p + (1 - |z|^2) * dbar p

in closed form.  The search maximizes min |dbar f| / max |dbar f| over a
disc grid by multi-start gradient ascent on a softmin surrogate.  Whether a
nowhere-vanishing candidate can exist at all is obstructed by the count
identity: with no interior zeros the boundary winding relative to the
tangent reflection must equal -2, and any candidate clearing the interior
threshold is checked against that necessary condition.  The search reports
"no nonvanishing candidate found at this bidegree", never a resolution of
the existence question.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT
from .errors import NonVanishingViolation
from .geometry import boundary_reflection_section, default_metric
from .surfaces import disc
from .winding import relative_winding

__all__ = ["CandidateFunction", "SearchResult", "necessary_winding", "search",
           "disc_grid"]

REQUIRED_WINDING = -2  # no interior zeros forces this boundary winding


class CandidateFunction:
    """f(z) = (1 - |z|^2) * sum_{j,k} c_{jk} z^j conj(z)^k."""

    def __init__(self, coefficients):
        c = np.asarray(coefficients, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("coefficients must form a square (d+1)x(d+1) array")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        self.coefficients = c
        self.bidegree = c.shape[0] - 1

    def polynomial(self, z):
        z = np.asarray(z, dtype=complex)
        zb = np.conj(z)
        out = np.zeros_like(z)
        for j in range(self.bidegree + 1):
            for k in range(self.bidegree + 1):
                if self.coefficients[j, k] != 0:
                    out = out + self.coefficients[j, k] * z**j * zb**k
        return out

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return (1.0 - np.abs(z) ** 2) * self.polynomial(z)

    def dbar(self, z):
        """Closed-form antiholomorphic derivative of the candidate."""
        z = np.asarray(z, dtype=complex)
        zb = np.conj(z)
        p = self.polynomial(z)
        dp = np.zeros_like(z)
        for j in range(self.bidegree + 1):
            for k in range(1, self.bidegree + 1):
                if self.coefficients[j, k] != 0:
                    dp = dp + k * self.coefficients[j, k] * z**j * zb ** (k - 1)
        return -z * p + (1.0 - np.abs(z) ** 2) * dp

    def coefficients_flat(self):
        """Flat list of (re, im) pairs, row major."""
        return [[float(c.real), float(c.imag)]
                for c in self.coefficients.reshape(-1)]


def dbar_basis(z, d):
    """Matrix B with dbar f = B @ c_flat for candidates of bidegree d."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    zb = np.conj(z)
    w = 1.0 - np.abs(z) ** 2
    cols = []
    for j in range(d + 1):
        for k in range(d + 1):
            col = -z * z**j * zb**k
            if k >= 1:
                col = col + w * k * z**j * zb ** (k - 1)
            cols.append(col)
    return np.stack(cols, axis=1)


def disc_grid(n=128):
    """Grid over the closed unit disc, always including the exact center."""
    xs = np.linspace(-1.0, 1.0, n)
    U, V = np.meshgrid(xs, xs, indexing="ij")
    z = (U + 1j * V).reshape(-1)
    z = z[np.abs(z) <= 1.0]
    return np.concatenate([z, [0.0 + 0.0j]])


def necessary_winding(candidate, tol=DEFAULT):
    """Boundary winding of dbar f relative to the tangent reflection.

    A candidate with nowhere-vanishing dbar f on the closed disc must
    return -2 (the count identity with an empty zero set).
    """
    surface = disc()
    g = default_metric(surface)
    comp = surface.boundary[0]
    r_fn = boundary_reflection_section(g, comp)

    def s_fn(theta):
        pu, pv = comp.point(theta)
        return candidate.dbar(pu + 1j * pv)

    return relative_winding(s_fn, r_fn, tol=tol)


@dataclass
class SearchResult:
    bidegree: int
    coefficients: list
    objective: float
    grid_min: float                 # min |dbar f| over the interior grid
    boundary_winding: object        # int, or None when the boundary check fails
    winding_condition_met: object   # bool, or None when not applicable
    interior_nonvanishing: bool
    trace: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "bidegree": int(self.bidegree),
            "coefficients": self.coefficients,
            "objective": float(self.objective),
            "grid_min": float(self.grid_min),
            "boundary_winding": (None if self.boundary_winding is None
                                 else int(self.boundary_winding)),
            "required_winding": REQUIRED_WINDING,
            "winding_condition_met": self.winding_condition_met,
            "interior_nonvanishing": bool(self.interior_nonvanishing),
            "conclusion": self.trace.get("conclusion", ""),
            "trace": {k: v for k, v in self.trace.items() if k != "conclusion"},
        }


def _objective(B, c):
    m = np.abs(B @ c)
    mx = m.max()
    if mx == 0.0:
        return 0.0
    return float(m.min() / mx)


def _surrogate_gradient(B, c, beta):
    """Gradient of softmin_beta(|Bc|)/max(|Bc|) in the real coefficient pairs.

    The gradient is packed as d/dRe + i*d/dIm, which for |B c| collapses to
    a single complex matrix-vector product per term.
    """
    F = B @ c
    m = np.abs(F)
    safe = np.maximum(m, 1e-300)
    mmin = m.min()
    expw = np.exp(-beta * (m - mmin))
    wgt = expw / expw.sum()
    soft = mmin - np.log(expw.mean()) / beta
    G_soft = ((wgt / safe) * F) @ np.conj(B)
    imax = int(np.argmax(m))
    M = m[imax]
    G_max = F[imax] / M * np.conj(B[imax])
    val = soft / M
    return val, (G_soft * M - soft * G_max) / (M * M)


def search(bidegree, restarts=20, iterations=150, grid_n=128, seed=0,
           tol=DEFAULT):
    """Multi-start ascent on the normalized minimum of |dbar f|.

    Deterministic for a fixed seed; restarts are merged by (objective,
    restart index).  The returned trace records the budget actually used.
    """
    if bidegree > 8:
        raise ValueError("bidegree is capped at 8")
    if grid_n < 64:
        raise ValueError("the evaluation grid must be at least 64x64")
    z = disc_grid(grid_n)
    interior = np.abs(z) < 1.0 - 1e-12
    B = dbar_basis(z, bidegree)
    n_coeff = B.shape[1]
    betas = (10.0, 100.0, 1000.0)
    best = None
    for ridx in range(restarts):
        rng = np.random.default_rng([seed, ridx])
        c = rng.normal(size=n_coeff) + 1j * rng.normal(size=n_coeff)
        c /= np.linalg.norm(c)
        best_c, best_val = c.copy(), _objective(B, c)
        step = 0.25
        per_phase = max(1, iterations // len(betas))
        for phase, beta in enumerate(betas):
            for _ in range(per_phase):
                _, grad = _surrogate_gradient(B, c, beta)
                # project out the scale direction and renormalize
                grad = grad - np.vdot(c, grad).real * c
                norm = np.linalg.norm(grad)
                if norm < 1e-14:
                    break
                c = c + step * grad / norm
                c /= np.linalg.norm(c)
                val = _objective(B, c)
                if val > best_val:
                    best_val, best_c = val, c.copy()
                step *= 0.985
        if best is None or (best_val, -ridx) > (best[0], -best[1]):
            best = (best_val, ridx, best_c)
    best_val, best_ridx, best_c = best
    candidate = CandidateFunction(best_c.reshape(bidegree + 1, bidegree + 1))
    m = np.abs(B @ best_c)
    grid_min = float(m[interior].min())
    grid_clear = grid_min > tol.activation_tol
    winding = None
    met = None
    try:
        winding = necessary_winding(candidate, tol)
        met = winding == REQUIRED_WINDING
    except NonVanishingViolation:
        pass
    # a grid minimum cannot certify nonvanishing on its own: a winding other
    # than -2 proves a zero hides between grid points, so the claim requires
    # both the cleared grid and the corroborating winding
    interior_ok = bool(grid_clear and met)
    if interior_ok:
        conclusion = ("candidate clears the interior grid and satisfies the "
                      "necessary boundary winding -2")
    elif grid_clear and met is False:
        conclusion = (f"boundary winding {winding} != -2 proves a zero "
                      "between grid points; no nonvanishing candidate found "
                      f"at bidegree <= {bidegree}")
    else:
        conclusion = (f"no nonvanishing candidate found at bidegree "
                      f"<= {bidegree}")
    return SearchResult(
        bidegree=bidegree,
        coefficients=candidate.coefficients_flat(),
        objective=best_val,
        grid_min=grid_min,
        boundary_winding=winding,
        winding_condition_met=met,
        interior_nonvanishing=interior_ok,
        trace={
            "seed": seed,
            "restarts": restarts,
            "iterations_per_restart": iterations,
            "best_restart": best_ridx,
            "grid_n": grid_n,
            "beta_schedule": list(betas),
            "conclusion": conclusion,
        },
    )
