"""Conformal points of tensor fields on compact oriented surfaces.

Locates zeros of the trace-free part of the endomorphism representing a
symmetric two-tensor field against a metric, computes their indices and
the winding numbers along boundary components, and cross-checks the
resulting Poincare-Hopf style count identities: for tensor pairs, for
pulled-back metrics of diffeomorphisms, for antiholomorphic derivatives
of vector fields, and for umbilical points of embedded surfaces.
"""

__version__ = "0.1.0"

from .config import Tolerances, DEFAULT as DEFAULT_TOLERANCES  # noqa: F401
from .counting import (  # noqa: F401
    PrescribedData,
    VerificationReport,
    cap_off_index,
    conformal_points,
    realization_roundtrip,
    realize_prescribed,
    verify_count_identity,
)
from .diffeo import (  # noqa: F401
    DiffeoMap,
    verify_area_preserving_count,
    verify_boundary_winding_formula,
)
from .embedded import EmbeddedPatch, ellipsoid_surface, umbilics  # noqa: F401
from .expr import differentiate, evaluate, parse, to_string  # noqa: F401
from .explorer import CandidateFunction, search  # noqa: F401
from .geometry import (  # noqa: F401
    EASection,
    TensorField,
    default_metric,
    random_trig_tensorfield,
)
from .surfaces import Surface, annulus, disc, sphere, torus  # noqa: F401
from .vector_fields import (  # noqa: F401
    VectorField,
    linearization_check,
    verify_field_count_identity,
)
from .winding import (  # noqa: F401
    ConformalPoint,
    Loop,
    algebraic_count,
    index_of_zero,
    relative_winding,
)
