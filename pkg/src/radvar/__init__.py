"""Radially symmetric variational problems with linear-growth Lagrangians.

Exact one-dimensional convex analysis, Euler-Lagrange inclusion solvers, a
direct proximal-gradient minimizer, a-priori bounds and certificates.
"""

__version__ = "0.1.0"

from .convexfun import (  # noqa: E402
    ConvexScalar,
    Interval,
    conjugate,
    convex_envelope,
    inverse_subgradient,
    make_pwl,
    subgradient,
)
from .problem import DiscreteProfile, RadialProblem, frad_value, load_problem  # noqa: E402

__all__ = [
    "ConvexScalar",
    "DiscreteProfile",
    "Interval",
    "RadialProblem",
    "conjugate",
    "convex_envelope",
    "frad_value",
    "inverse_subgradient",
    "load_problem",
    "make_pwl",
    "subgradient",
]
