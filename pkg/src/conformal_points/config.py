"""Numerical tolerances, with environment-variable overrides.

Every knob can be overridden by an environment variable named
``CONFPOINTS_<FIELD>`` (upper case), e.g. ``CONFPOINTS_ZERO_TOL=1e-8``,
or per run through the ``tolerances`` block of a CLI configuration.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace

ENV_PREFIX = "CONFPOINTS_"


@dataclass(frozen=True)
class Tolerances:
    grid_n: int = 256                 # scan grid resolution per chart
    zero_tol: float = 1e-9            # |section| below this counts as zero
    activation_tol: float = 1e-9      # |section| above this counts as nonvanishing
    newton_tol: float = 1e-12         # step tolerance of the zero refinement
    newton_max_iter: int = 50
    dedup_radius: float = 1e-6        # zeros closer than this are identified
    boundary_clearance: float = 1e-4  # zeros closer to the boundary are an error
    winding_samples: int = 256        # base loop sampling for angle accumulation
    step_bound: float = math.pi / 2   # certified per-step angle bound
    max_refine_depth: int = 12
    integrality_tol: float = 1e-6     # accumulated angle vs nearest 2*pi multiple
    isolation_samples: int = 256      # circle samples for isolation certification
    degenerate_grid_count: int = 16   # grid zeros beyond this mean a non-isolated locus

    def replace(self, **kw):
        return replace(self, **kw)


def from_env(base=None):
    """Tolerances with CONFPOINTS_* environment overrides applied."""
    base = base or Tolerances()
    overrides = {}
    for f in fields(Tolerances):
        raw = os.environ.get(ENV_PREFIX + f.name.upper())
        if raw is not None:
            value = float(raw)
            if isinstance(getattr(base, f.name), int):
                value = int(value)
            overrides[f.name] = value
    return base.replace(**overrides) if overrides else base


DEFAULT = Tolerances()
