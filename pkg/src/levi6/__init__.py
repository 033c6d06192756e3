"""Invariants of rank-4 distributions on 6-manifolds.

The Levi form of (M, H) classifies the structure as elliptic, hyperbolic or
degenerate.  Elliptic structures carry a canonical almost complex structure
J with an obstruction tensor S; hyperbolic ones split H = H+ (+) H- with
obstructions S+ and S-.  Both vanish exactly on the flat models.
"""

__version__ = "0.1.0"

from .distribution import (  # noqa: E402
    DEGENERATE,
    ELLIPTIC,
    HYPERBOLIC,
    Structure6,
    VectorField,
    classify,
    classify_many,
    levi_form,
    levi_quadratic,
)
from .elliptic import elliptic_invariants, flatness_verdict  # noqa: E402
from .hyperbolic import hyperbolic_flatness_verdict, hyperbolic_invariants  # noqa: E402
from .pde_frontend import CAUCHY_RIEMANN, DECOUPLED, from_equations  # noqa: E402

__all__ = [
    "DEGENERATE", "ELLIPTIC", "HYPERBOLIC", "Structure6", "VectorField", "classify",
    "classify_many", "levi_form", "levi_quadratic", "elliptic_invariants", "flatness_verdict",
    "hyperbolic_flatness_verdict", "hyperbolic_invariants", "CAUCHY_RIEMANN", "DECOUPLED",
    "from_equations",
]
