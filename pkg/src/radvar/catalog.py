"""Built-in example problems and their closed-form reference profiles."""

from __future__ import annotations

import math

import numpy as np

from .errors import SchemaError, UnknownExample
from .problem import RadialProblem, load_problem

EPS_MAX = math.sqrt(math.log(2.0))

NAMES = ("example2", "n1convex", "constrained", "doublewell", "perturbation")


def example2_spec(eps: float = 0.5, n: int = 4000) -> dict:
    """N=2, R=2, g = s^2/2 and a non-convex ramp ``h`` that is flat above ``-eps``."""
    if not (0.0 < eps <= EPS_MAX * (1 + 1e-15)):
        raise SchemaError(f"eps must lie in (0, sqrt(log 2)], got {eps}")
    return {
        "name": "example2",
        "dimension": 2,
        "radius": 2.0,
        "g": {"kind": "power", "coef": 0.5, "exp": 2},
        "h": {"kind": "pwa_t", "knots": [-eps], "slopes": [4.0, 0.0], "value_at_zero": 0.0},
        "mu": {"kind": "none"},
        "grid": {"n": n, "grading": "uniform"},
    }


def n1convex_spec(n: int = 400) -> dict:
    """N=1 with a linear-growth g (M=1) and a smooth increasing h with K=0.8 < M/R."""
    return {
        "name": "n1convex",
        "dimension": 1,
        "radius": 1.0,
        "g": {"kind": "pwl", "breakpoints": [0, 0.5, 1, 2], "values": [0, 0.1, 0.4, 1.4], "domain_end": None},
        "h": {"kind": "softplus", "scale": 0.8},
        "mu": {"kind": "none"},
        "grid": {"n": n, "grading": "uniform"},
    }


def constrained_spec(n: int = 400) -> dict:
    """Autonomous linear-growth g, convex h with K=1.5 < N M / R = 2, and mu = 0.3 + 0.3 r."""
    return {
        "name": "constrained",
        "dimension": 2,
        "radius": 1.0,
        "g": {"kind": "pwl", "breakpoints": [0, 0.5, 1.5], "values": [0, 0.2, 1.2], "domain_end": None},
        "h": {"kind": "pwa_t", "knots": [-0.3], "slopes": [-1.0, 1.5], "value_at_zero": 0.0},
        "mu": {"kind": "affine", "a": 0.3, "b": 0.3},
        "grid": {"n": n, "grading": "uniform"},
    }


def doublewell_raw(s):
    """Non-convex gradient density with g(0) = g**(0) = 0 and an affine tail of slope 18."""
    s = np.asarray(s, dtype=float)
    core = 0.5 * s + s**2 * (s - 1.5) ** 2
    knee = 2.5
    at_knee = 0.5 * knee + knee**2 * (knee - 1.5) ** 2
    return np.where(s <= knee, core, at_knee + 18.0 * (s - knee))


DOUBLEWELL_STEP = 0.01


def doublewell_spec(n: int = 200) -> dict:
    s = np.round(np.arange(0.0, 4.0 + DOUBLEWELL_STEP / 2, DOUBLEWELL_STEP), 10)
    return {
        "name": "doublewell",
        "dimension": 2,
        "radius": 1.0,
        "g": {"kind": "samples", "s": s.tolist(), "values": doublewell_raw(s).tolist(), "relax": True},
        "h": {"kind": "affine", "slope": 1.5},
        "mu": {"kind": "none"},
        "grid": {"n": n, "grading": "uniform"},
    }


def example_catalog() -> list[str]:
    return list(NAMES)


def get_example(name: str, eps: float = 0.5, n: int | None = None) -> RadialProblem:
    """Load a catalog problem by name (``perturbation`` shares example2's data)."""
    if name in ("example2", "perturbation"):
        spec = example2_spec(eps, n or (1000 if name == "perturbation" else 4000))
        spec["name"] = name
    elif name == "n1convex":
        spec = n1convex_spec(n or 400)
    elif name == "constrained":
        spec = constrained_spec(n or 400)
    elif name == "doublewell":
        spec = doublewell_spec(n or 200)
    else:
        raise UnknownExample(name)
    return load_problem(spec)


def example2_profile(r, eps: float = 0.5, k: float = 0.0):
    """Reference profile of example2: ``r^2 - 1 - eps + k log r`` inside, log-harmonic outside."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        inner = r**2 - 1.0 - eps + (k * np.log(r) if k else 0.0)
        outer = eps * np.log(r / 2.0) / math.log(2.0)
    return np.where(r <= 1.0, inner, outer)


def example2_energy(eps: float = 0.5) -> float:
    """Closed-form energy of the reference profile."""
    return (eps**2 - math.log(2.0)) / (2.0 * math.log(2.0))
