"""Problem data for radial variational problems and their a-priori bounds.

A problem is the reduced one-dimensional functional

    F(u) = int_0^R r^(N-1) [ g(r, |u'(r)|) + h(r, u(r)) ] dr,   u(R) = 0,

with an optional gradient constraint ``|u'(r)| <= mu(r)``.  This module
validates the data, computes the growth slope ``M``, the momentum bound
``M0``, the slope bound ``sigma0`` and evaluates ``F`` by exact-weight
midpoint quadrature on a grid of cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import jsonschema
import numpy as np

from . import convexfun as cf
from .convexfun import ConvexScalar, NagumoFunction
from .errors import (
    DegenerateG,
    GridMismatch,
    HypothesisViolation,
    IncompatibleProblem,
    NonConvexData,
    RatioUnreachable,
    SchemaError,
)

INF = math.inf


# --------------------------------------------------------------------------
# radial coefficient catalog


class RadialScale:
    """Positive coefficient ``c(r)`` drawn from a small expression catalog."""

    def __init__(self, kind: str = "const", **params):
        self.kind = kind
        self.params = params
        if kind == "table":
            self._r = np.asarray(params["r"], dtype=float)
            self._v = np.asarray(params["values"], dtype=float)
            if self._r.size != self._v.size or self._r.size == 0 or np.any(np.diff(self._r) <= 0):
                raise SchemaError("table needs strictly increasing r and matching values")

    @classmethod
    def from_spec(cls, spec) -> "RadialScale":
        if spec is None:
            return cls("const", value=1.0)
        if isinstance(spec, (int, float)):
            return cls("const", value=float(spec))
        spec = dict(spec)
        kind = spec.pop("kind")
        return cls(kind, **spec)

    def to_spec(self) -> dict:
        return {"kind": self.kind, **self.params}

    @property
    def is_constant(self) -> bool:
        return self.kind in ("none", "const")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        P = self.params
        if self.kind == "none":
            out = np.full(r.shape, INF)
        elif self.kind == "const":
            out = np.full(r.shape, float(P["value"]))
        elif self.kind == "affine":
            out = P.get("a", 0.0) + P.get("b", 0.0) * r
        elif self.kind == "power":
            out = P.get("c", 1.0) * r ** P.get("k", 1.0)
        elif self.kind == "inv_affine":
            out = 1.0 / (P.get("a", 1.0) + P.get("b", 0.0) * r)
        elif self.kind == "table":
            idx = np.clip(np.searchsorted(self._r, r, "right") - 1, 0, self._r.size - 1)
            out = self._v[idx]
        else:
            raise SchemaError(f"unknown radial coefficient kind {self.kind!r}")
        return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# gradient Lagrangian g(r, s) = c(r) * base(s) [+ extra(s)]


class GradientLagrangian:
    """``g(r, s)`` as radial pieces ``c(r) base_k(s)`` plus an optional ``extra(s)``.

    ``pieces`` is a list of ``(r_lo, base)``; the piece with the largest
    ``r_lo <= r`` applies.  ``extra`` is the perturbation term used by the
    superlinear family and may be ``None``.
    """

    def __init__(self, pieces, scale: RadialScale | None = None, extra: ConvexScalar | None = None):
        self.pieces = [(float(r0), b) for r0, b in pieces]
        self._r0 = np.array([r0 for r0, _ in self.pieces])
        self.scale = scale or RadialScale("const", value=1.0)
        self.extra = extra
        self._cache: dict = {}

    @classmethod
    def autonomous(cls, base: ConvexScalar) -> "GradientLagrangian":
        return cls([(0.0, base)])

    def with_extra(self, extra: ConvexScalar) -> "GradientLagrangian":
        if self.extra is not None:
            extra = cf.Sum([self.extra, extra])
        return GradientLagrangian(self.pieces, self.scale, extra)

    @property
    def is_autonomous(self) -> bool:
        return len(self.pieces) == 1 and self.scale.is_constant

    def _piece_index(self, r):
        return np.clip(np.searchsorted(self._r0, np.asarray(r, dtype=float), "right") - 1, 0, len(self.pieces) - 1)

    def at(self, r: float) -> ConvexScalar:
        """``g(r, .)`` as a single ConvexScalar."""
        k = int(self._piece_index(r))
        c = float(self.scale(r))
        key = (k, c)
        if key not in self._cache:
            f = cf.scale(self.pieces[k][1], c)
            if self.extra is not None:
                f = cf.Sum([f, self.extra])
            self._cache[key] = f
        return self._cache[key]

    def _groups(self, r):
        """Yield (mask, piece-index, c) groups over an array of radii."""
        r = np.asarray(r, dtype=float)
        k = self._piece_index(r)
        c = np.asarray(self.scale(r), dtype=float) * np.ones(r.shape)
        if self.extra is None:
            for kk in np.unique(k):
                yield k == kk, int(kk), c
        else:
            keys = np.stack([np.asarray(k, dtype=float), c], axis=-1).reshape(-1, 2)
            for kk, cc in np.unique(keys, axis=0):
                yield (k == kk) & (c == cc), int(kk), c

    def value(self, r, s):
        r, s = np.broadcast_arrays(np.asarray(r, float), np.asarray(s, float))
        out = np.empty(r.shape)
        for m, k, c in self._groups(r):
            out[m] = c[m] * self.pieces[k][1](s[m])
        if self.extra is not None:
            out = out + self.extra(s)
        return out

    def _one_sided(self, r, s, side):
        r, s = np.broadcast_arrays(np.asarray(r, float), np.abs(np.asarray(s, float)))
        out = np.empty(r.shape)
        for m, k, c in self._groups(r):
            base = self.pieces[k][1]
            d = base.dright(s[m]) if side == "right" else base.dleft(s[m])
            out[m] = c[m] * d
        if self.extra is not None:
            out = out + (self.extra.dright(s) if side == "right" else self.extra.dleft(s))
        return out

    def dright(self, r, s):
        return self._one_sided(r, s, "right")

    def dleft(self, r, s):
        return self._one_sided(r, s, "left")

    def domain_end(self, r):
        r = np.asarray(r, float)
        out = np.empty(r.shape)
        for m, k, _ in self._groups(r):
            out[m] = self.pieces[k][1].domain_end
        if self.extra is not None:
            out = np.minimum(out, self.extra.domain_end)
        return out

    def prox(self, r, v, t):
        """Cellwise ``argmin_x t g(r, |x|) + (x - v)^2 / 2``."""
        r, v, t = np.broadcast_arrays(np.asarray(r, float), np.asarray(v, float), np.asarray(t, float))
        out = np.empty(r.shape)
        if self.extra is None:
            for m, k, c in self._groups(r):
                out[m] = self.pieces[k][1].prox(v[m], c[m] * t[m])
            return out
        for m, k, c in self._groups(r):
            f = self.at(float(r[m][0]))
            out[m] = f.prox(v[m], t[m])
        return out

    def inverse(self, r, q):
        """Cellwise (lo, hi) of ``{x >= 0 : |q| in d g(r, x)}``; NaN outside the dual domain."""
        r, q = np.broadcast_arrays(np.asarray(r, float), np.abs(np.asarray(q, float)))
        lo = np.empty(r.shape)
        hi = np.empty(r.shape)
        for m, k, c in self._groups(r):
            if self.extra is None:
                lo[m], hi[m] = self.pieces[k][1]._inverse(q[m] / c[m])
            else:
                lo[m], hi[m] = self.at(float(r[m][0]))._inverse(q[m])
        return lo, hi

    def nagumo(self, r_samples) -> NagumoFunction:
        r_samples = np.asarray(r_samples, dtype=float)
        if len(self.pieces) == 1:
            base = self.pieces[0][1]
            c = float(np.min(self.scale(r_samples)))
            psi = cf.shift(cf.scale(base, c), -c * float(base(0.0)))
            if self.extra is not None:
                psi = cf.Sum([psi, cf.shift(self.extra, -float(self.extra(0.0)))])
            M = psi.asymptotic_slope
            if M == 0.0:
                raise DegenerateG("g has no growth")
            s0 = cf._largest_zero(psi)
            if math.isinf(s0):
                raise DegenerateG("g has no growth")
            return NagumoFunction(psi, s0, M)
        return cf.nagumo_from_g(self.at, list(r_samples))


# --------------------------------------------------------------------------
# zero-order term h(r, t)


def _smooth_relu(x, eta):
    """Box-mollified ``max(x, 0)`` and its derivative (exact for ``eta = 0``)."""
    if eta <= 0:
        return np.maximum(x, 0.0), (x > 0).astype(float)
    val = np.where(x <= -eta, 0.0, np.where(x >= eta, x, (x + eta) ** 2 / (4 * eta)))
    der = np.clip((x + eta) / (2 * eta), 0.0, 1.0)
    return val, der


class HTerm:
    """Scalar term ``h(t)`` of the zero-order Lagrangian.

    Subclasses provide values, one-sided derivatives, a Lipschitz constant
    and convexity information.  ``value_eta``/``grad_eta`` are a smoothed
    pair used by the direct solver; they coincide with the exact ones for
    smooth terms.
    """

    kind = "?"
    is_convex = True
    lipschitz = INF

    def value(self, t):
        raise NotImplementedError

    def dright(self, t):
        raise NotImplementedError

    def dleft(self, t):
        raise NotImplementedError

    def value_eta(self, t, eta):
        return self.value(t)

    def grad_eta(self, t, eta):
        return 0.5 * (self.dright(t) + self.dleft(t))

    def max_argmin(self) -> float:
        """Largest minimizer (``-inf`` when h is increasing, ``+inf`` when decreasing)."""
        d = lambda t: float(self.dleft(np.array(t)))  # noqa: E731
        if d(0.0) <= 0:
            lo, hi = 0.0, 1.0
            while d(hi) <= 0:
                lo, hi = hi, 2 * hi
                if hi > 1e12:
                    return INF
        else:
            lo, hi = -1.0, 0.0
            while d(lo) > 0:
                lo, hi = 2 * lo, lo
                if lo < -1e12:
                    return -INF
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if d(mid) <= 0:
                lo = mid
            else:
                hi = mid
        return lo


class PWA(HTerm):
    """Continuous piecewise-affine ``h(t)`` with knots and ``len(knots)+1`` slopes."""

    kind = "pwa_t"

    def __init__(self, knots, slopes, value_at_zero: float = 0.0):
        self.knots = np.asarray(knots, dtype=float).ravel()
        self.slopes = np.asarray(slopes, dtype=float).ravel()
        if self.slopes.size != self.knots.size + 1:
            raise SchemaError("pwa_t needs len(slopes) == len(knots) + 1")
        if np.any(np.diff(self.knots) <= 0):
            raise SchemaError("pwa_t knots must be strictly increasing")
        self.value_at_zero = float(value_at_zero)
        self.jumps = np.diff(self.slopes)
        self.const = self.value_at_zero - float(np.sum(self.jumps * np.maximum(-self.knots, 0.0)))
        self.is_convex = bool(np.all(self.jumps >= 0))
        self.lipschitz = float(np.max(np.abs(self.slopes)))

    def to_spec(self):
        return {"kind": "pwa_t", "knots": self.knots.tolist(), "slopes": self.slopes.tolist(),
                "value_at_zero": self.value_at_zero}

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return self.const + self.slopes[0] * t + np.maximum(t[..., None] - self.knots, 0.0) @ self.jumps

    def dright(self, t):
        t = np.asarray(t, dtype=float)
        return self.slopes[np.searchsorted(self.knots, t, "right")]

    def dleft(self, t):
        t = np.asarray(t, dtype=float)
        return self.slopes[np.searchsorted(self.knots, t, "left")]

    def value_eta(self, t, eta):
        t = np.asarray(t, dtype=float)
        val, _ = _smooth_relu(t[..., None] - self.knots, eta)
        return self.const + self.slopes[0] * t + val @ self.jumps

    def grad_eta(self, t, eta):
        t = np.asarray(t, dtype=float)
        if eta <= 0:
            return super().grad_eta(t, eta)
        _, der = _smooth_relu(t[..., None] - self.knots, eta)
        return self.slopes[0] + der @ self.jumps

    def max_argmin(self):
        if not self.is_convex:
            return super().max_argmin()
        pos = np.nonzero(self.slopes > 0)[0]
        if pos.size == 0:
            return INF
        k = int(pos[0])
        return -INF if k == 0 else float(self.knots[k - 1])


class Affine(HTerm):
    kind = "affine"

    def __init__(self, slope: float, intercept: float = 0.0):
        self.slope = float(slope)
        self.intercept = float(intercept)
        self.lipschitz = abs(self.slope)

    def to_spec(self):
        return {"kind": "affine", "slope": self.slope, "intercept": self.intercept}

    def value(self, t):
        return self.intercept + self.slope * np.asarray(t, dtype=float)

    def dright(self, t):
        return np.full(np.shape(t), self.slope)

    dleft = dright

    def max_argmin(self):
        return -INF if self.slope > 0 else (INF if self.slope < 0 else 0.0)


class Softplus(HTerm):
    """``K log(1 + e^(t - shift))``: smooth, convex, increasing, Lipschitz ``K``."""

    kind = "softplus"

    def __init__(self, scale: float, shift: float = 0.0):
        self.scale = float(scale)
        self.shift = float(shift)
        self.lipschitz = abs(self.scale)
        self.is_convex = self.scale >= 0

    def to_spec(self):
        return {"kind": "softplus", "scale": self.scale, "shift": self.shift}

    def value(self, t):
        return self.scale * np.logaddexp(0.0, np.asarray(t, dtype=float) - self.shift)

    def dright(self, t):
        z = np.asarray(t, dtype=float) - self.shift
        return self.scale * 0.5 * (1.0 + np.tanh(0.5 * z))

    dleft = dright

    def max_argmin(self):
        return -INF if self.scale > 0 else INF


class Sine(HTerm):
    """``amp sin(freq t + phase)``: smooth, non-convex, Lipschitz ``|amp freq|``."""

    kind = "sine"
    is_convex = False

    def __init__(self, amp: float, freq: float = 1.0, phase: float = 0.0):
        self.amp, self.freq, self.phase = float(amp), float(freq), float(phase)
        self.lipschitz = abs(self.amp * self.freq)

    def to_spec(self):
        return {"kind": "sine", "amp": self.amp, "freq": self.freq, "phase": self.phase}

    def value(self, t):
        return self.amp * np.sin(self.freq * np.asarray(t, dtype=float) + self.phase)

    def dright(self, t):
        return self.amp * self.freq * np.cos(self.freq * np.asarray(t, dtype=float) + self.phase)

    dleft = dright


class Quadratic(HTerm):
    """``a (t - c)^2 + d``; convex but not globally Lipschitz.

    Useful only where a convex scalar ``h`` is needed on its own (truncation);
    problems reject it through the Lipschitz check.
    """

    kind = "quadratic"

    def __init__(self, a: float, c: float = 0.0, d: float = 0.0):
        self.a, self.c, self.d = float(a), float(c), float(d)
        self.is_convex = self.a >= 0

    def to_spec(self):
        return {"kind": "quadratic", "a": self.a, "c": self.c, "d": self.d}

    def value(self, t):
        return self.a * (np.asarray(t, dtype=float) - self.c) ** 2 + self.d

    def dright(self, t):
        return 2 * self.a * (np.asarray(t, dtype=float) - self.c)

    dleft = dright

    def max_argmin(self):
        return self.c


class SumH(HTerm):
    kind = "sum"

    def __init__(self, terms: Sequence[HTerm]):
        self.terms = list(terms)
        self.is_convex = all(t.is_convex for t in self.terms)
        self.lipschitz = float(sum(t.lipschitz for t in self.terms))

    def to_spec(self):
        return {"kind": "sum", "terms": [t.to_spec() for t in self.terms]}

    def value(self, t):
        return sum(x.value(t) for x in self.terms)

    def dright(self, t):
        return sum(x.dright(t) for x in self.terms)

    def dleft(self, t):
        return sum(x.dleft(t) for x in self.terms)

    def value_eta(self, t, eta):
        return sum(x.value_eta(t, eta) for x in self.terms)

    def grad_eta(self, t, eta):
        return sum(x.grad_eta(t, eta) for x in self.terms)


def hterm_from_spec(spec: dict) -> HTerm:
    kind = spec.get("kind")
    if kind == "pwa_t":
        return PWA(spec["knots"], spec["slopes"], spec.get("value_at_zero", 0.0))
    if kind == "affine":
        return Affine(spec["slope"], spec.get("intercept", 0.0))
    if kind == "softplus":
        return Softplus(spec["scale"], spec.get("shift", 0.0))
    if kind == "sine":
        return Sine(spec["amp"], spec.get("freq", 1.0), spec.get("phase", 0.0))
    if kind == "quadratic":
        return Quadratic(spec["a"], spec.get("c", 0.0), spec.get("d", 0.0))
    if kind == "table":
        t = np.asarray(spec["t"], dtype=float)
        v = np.asarray(spec["values"], dtype=float)
        if t.size < 2 or t.size != v.size or np.any(np.diff(t) <= 0):
            raise SchemaError("h table needs >= 2 strictly increasing abscissae")
        sl = np.diff(v) / np.diff(t)
        slopes = np.concatenate([[sl[0]], sl, [sl[-1]]])
        value0 = float(np.interp(0.0, t, v, left=v[0] + sl[0] * (0 - t[0]), right=v[-1] + sl[-1] * (0 - t[-1])))
        return PWA(t, slopes, value0)
    if kind == "sum":
        return SumH([hterm_from_spec(s) for s in spec["terms"]])
    raise SchemaError(f"unknown h kind {kind!r}")


class ZeroOrderLagrangian:
    """``h(r, t) = c(r) * term(t)``; ``c`` defaults to 1."""

    def __init__(self, term: HTerm, scale: RadialScale | None = None):
        self.term = term
        self.scale = scale or RadialScale("const", value=1.0)

    @property
    def is_autonomous(self) -> bool:
        return self.scale.is_constant

    @property
    def is_convex(self) -> bool:
        return self.term.is_convex

    def value(self, r, t):
        return self.scale(r) * self.term.value(t)

    def clarke(self, r, t):
        """Clarke gradient ``[lo, hi]`` in ``t`` (one-sided slopes ordered)."""
        c = self.scale(r)
        a, b = self.term.dleft(t), self.term.dright(t)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        return c * lo, c * hi

    def value_eta(self, r, t, eta):
        return self.scale(r) * self.term.value_eta(t, eta)

    def grad_eta(self, r, t, eta):
        return self.scale(r) * self.term.grad_eta(t, eta)

    def lipschitz(self, r):
        return np.abs(self.scale(r)) * self.term.lipschitz


# --------------------------------------------------------------------------
# profiles and grids


def uniform_grid(R: float, n: int) -> np.ndarray:
    return np.linspace(0.0, float(R), int(n) + 1)


def geometric_grid(R: float, n: int, r_min: float) -> np.ndarray:
    """Node 0 followed by ``n`` geometrically spaced nodes from ``r_min`` to ``R``."""
    return np.concatenate([[0.0], np.geomspace(float(r_min), float(R), int(n))])


def cell_weights(grid: np.ndarray, N: int) -> np.ndarray:
    """Exact integrals of ``r^(N-1)`` over the grid cells."""
    g = np.asarray(grid, dtype=float)
    return (g[1:] ** N - g[:-1] ** N) / N


@dataclass(frozen=True)
class DiscreteProfile:
    """Grid function with ``u(R) = 0``; cell slopes are the primitive unknowns."""

    grid: np.ndarray
    slopes: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        slopes = np.asarray(self.slopes, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
            raise GridMismatch("grid must be strictly increasing from 0")
        if slopes.shape != (grid.size - 1,):
            raise GridMismatch(f"expected {grid.size - 1} slopes, got {slopes.shape}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "slopes", slopes)

    @classmethod
    def from_values(cls, grid, u) -> "DiscreteProfile":
        grid = np.asarray(grid, dtype=float)
        u = np.asarray(u, dtype=float)
        return cls(grid, np.diff(u - u[-1]) / np.diff(grid))

    @classmethod
    def from_function(cls, grid, fn: Callable) -> "DiscreteProfile":
        grid = np.asarray(grid, dtype=float)
        return cls.from_values(grid, fn(grid))

    @classmethod
    def zero(cls, grid) -> "DiscreteProfile":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.zeros(grid.size - 1))

    @property
    def n(self) -> int:
        return self.slopes.size

    @property
    def R(self) -> float:
        return float(self.grid[-1])

    @property
    def dr(self) -> np.ndarray:
        return np.diff(self.grid)

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * (self.grid[1:] + self.grid[:-1])

    @property
    def u(self) -> np.ndarray:
        incr = self.slopes * self.dr
        tail = np.cumsum(incr[::-1])[::-1]
        return np.append(-tail, 0.0)

    @property
    def u_mid(self) -> np.ndarray:
        u = self.u
        return 0.5 * (u[1:] + u[:-1])


# --------------------------------------------------------------------------
# problem


@dataclass
class CompatibilityReport:
    M: float
    M0: float
    sigma0: float
    compatible: bool
    convex_case_threshold: float
    hg_check: bool | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "M0": self.M0,
            "sigma0": self.sigma0,
            "compatible": self.compatible,
            "convex_case_threshold": self.convex_case_threshold,
            "hg_check": self.hg_check,
            "notes": list(self.notes),
        }


@dataclass
class RadialProblem:
    """Full datum of a radial problem.

    Attributes:
        N: Space dimension.
        R: Ball radius.
        g: Gradient Lagrangian.
        h: Zero-order Lagrangian.
        H0: Lipschitz modulus of ``h(r, .)`` as a function of ``r``.
        mu: Gradient constraint (``+inf`` where inactive).
        psi: Nagumo gauge of ``g``.
        spec: The JSON spec the problem was loaded from, if any.
        g_samples: ``(s, values)`` of the raw gradient data when ``g`` is a relaxation.
    """

    N: int
    R: float
    g: GradientLagrangian
    h: ZeroOrderLagrangian
    H0: Callable
    mu: RadialScale
    psi: NagumoFunction
    spec: dict | None = None
    g_samples: tuple | None = None
    name: str = ""

    def __post_init__(self):
        self._report: CompatibilityReport | None = None

    @property
    def constrained(self) -> bool:
        return self.mu.kind != "none"

    def mu_at(self, r):
        return np.asarray(self.mu(r), dtype=float) * np.ones(np.shape(r))

    def with_g(self, g: GradientLagrangian, psi: NagumoFunction | None = None) -> "RadialProblem":
        psi = psi or g.nagumo(_r_samples(self.R))
        return RadialProblem(self.N, self.R, g, self.h, self.H0, self.mu, psi, self.spec, self.g_samples, self.name)

    @property
    def report(self) -> CompatibilityReport:
        if self._report is None:
            self._report = check_compatibility(self)
        return self._report

    @property
    def M(self) -> float:
        return self.report.M

    @property
    def M0(self) -> float:
        return self.report.M0

    @property
    def sigma0(self) -> float:
        return self.report.sigma0


def _r_samples(R: float, n: int = 257) -> np.ndarray:
    return np.linspace(R / n, R, n)


_FUNC = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["power", "abs", "pwl", "xlog", "radial", "table", "samples"]},
    },
}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["dimension", "radius", "g", "h"],
    "properties": {
        "dimension": {"type": "integer", "minimum": 1},
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "g": _FUNC,
        "h": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["pwa_t", "affine", "softplus", "sine", "table", "sum", "quadratic"]},
                "r_scale": {"type": ["object", "number"]},
            },
        },
        "H0": {"type": ["number", "object", "null"]},
        "mu": {
            "type": "object",
            "required": ["kind"],
            "properties": {"kind": {"enum": ["none", "const", "affine", "power", "inv_affine", "table"]}},
        },
        "grid": {
            "type": "object",
            "properties": {
                "n": {"type": "integer", "minimum": 8},
                "grading": {"enum": ["uniform", "geometric"]},
                "r_min": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "name": {"type": "string"},
    },
}


def _g_from_spec(spec: dict):
    """Return (GradientLagrangian, g_samples or None)."""
    kind = spec["kind"]
    try:
        if kind in ("power", "abs", "pwl", "xlog"):
            return GradientLagrangian.autonomous(cf.function_from_spec(spec)), None
        if kind == "radial":
            base, _ = _g_from_spec(spec["base"])
            return GradientLagrangian(base.pieces, RadialScale.from_spec(spec["scale"])), None
        if kind == "table":
            r = spec["r"]
            fns = [cf.function_from_spec(f) for f in spec["functions"]]
            if len(r) != len(fns) or r[0] != 0:
                raise SchemaError("g table needs r starting at 0 and one function per r")
            return GradientLagrangian(list(zip(r, fns))), None
        if kind == "samples":
            s = np.asarray(spec["s"], dtype=float)
            v = np.asarray(spec["values"], dtype=float)
            if spec.get("relax", False):
                env, _ = cf.convex_envelope(np.column_stack([s, v]))
                return GradientLagrangian.autonomous(env), (s, v)
            return GradientLagrangian.autonomous(cf.make_pwl(s, v, None)), None
    except NonConvexData as exc:
        raise HypothesisViolation(f"g is not convex: {exc}") from exc
    except KeyError as exc:
        raise SchemaError(f"missing field {exc} in g spec") from exc
    raise SchemaError(f"unknown g kind {kind!r}")


def load_problem(spec: dict, seed: int = 0) -> RadialProblem:
    """Validate a problem spec and build the RadialProblem.

    Raises:
        SchemaError: if the spec does not match the schema.
        HypothesisViolation: if ``g`` is not convex, ``h`` fails the Lipschitz
            spot check against ``H0``, or ``mu`` decreases.
    """
    try:
        jsonschema.validate(spec, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(exc.message) from exc
    N = int(spec["dimension"])
    R = float(spec["radius"])
    g, samples = _g_from_spec(spec["g"])
    hspec = dict(spec["h"])
    h_scale = RadialScale.from_spec(hspec.pop("r_scale", None))
    h = ZeroOrderLagrangian(hterm_from_spec(hspec), h_scale)
    mu = RadialScale.from_spec(spec.get("mu", {"kind": "none"}))

    rr = np.linspace(0.0, R, 1025)
    if mu.kind != "none":
        mv = np.asarray(mu(rr), dtype=float)
        if np.any(mv <= 0):
            raise HypothesisViolation("mu must be positive")
        if np.any(np.diff(mv) < -1e-12 * np.maximum(1.0, np.abs(mv[1:]))):
            raise HypothesisViolation("mu must be non-decreasing in r")

    H0spec = spec.get("H0")
    if H0spec is None:
        H0 = h.lipschitz
    else:
        H0scale = RadialScale.from_spec(H0spec)
        H0 = lambda r, _s=H0scale: np.asarray(_s(r), dtype=float) * np.ones(np.shape(r))  # noqa: E731
    _check_lipschitz(h, H0, R, seed)

    try:
        psi = g.nagumo(_r_samples(R))
    except DegenerateG as exc:
        raise HypothesisViolation(str(exc)) from exc
    return RadialProblem(N, R, g, h, H0, mu, psi, spec, samples, spec.get("name", ""))


def _check_lipschitz(h: ZeroOrderLagrangian, H0, R: float, seed: int, n: int = 2000):
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.0, R, n)
    L = np.asarray(H0(r), dtype=float) * np.ones(n)
    if not np.all(np.isfinite(L)):
        raise HypothesisViolation("h is not Lipschitz (H0 infinite)")
    t = rng.normal(0.0, 3.0, n)
    tau = t + rng.normal(0.0, 1.0, n)
    lhs = np.abs(h.value(r, t) - h.value(r, tau))
    rhs = L * np.abs(t - tau)
    if np.any(lhs > rhs * (1 + 1e-9) + 1e-12):
        raise HypothesisViolation("h fails the Lipschitz spot check against H0")


def compute_M(p: RadialProblem) -> float:
    """Asymptotic slope of the Nagumo gauge."""
    return float(p.psi.asymptotic_slope)


def compute_M0(p: RadialProblem, n: int = 4096) -> float:
    """``sup_r r^(1-N) int_0^r rho^(N-1) H0(rho) d rho`` on an ``n``-node grid.

    ``H0`` is taken piecewise constant at cell midpoints and integrated
    against ``rho^(N-1)`` exactly.
    """
    grid = np.linspace(0.0, p.R, n)
    mid = 0.5 * (grid[1:] + grid[:-1])
    H = np.asarray(p.H0(mid), dtype=float) * np.ones(mid.shape)
    cum = np.cumsum(H * cell_weights(grid, p.N))
    vals = grid[1:] ** (1 - p.N) * cum
    return float(max(0.0, np.max(vals)))


def check_compatibility(p: RadialProblem) -> CompatibilityReport:
    """Compare the momentum bound ``M0`` with the growth slope ``M``."""
    M = compute_M(p)
    M0 = compute_M0(p)
    compatible = M0 < M
    notes = []
    if compatible:
        if M0 == 0:
            sigma0 = float(p.psi.s0)
        else:
            try:
                sigma0 = cf.ratio_root(p.psi, M0)
            except RatioUnreachable:
                sigma0 = INF
    else:
        sigma0 = INF
        notes.append(f"M0={M0:.6g} >= M={M:.6g}: compatibility fails")
    threshold = p.N * M / p.R
    hg = None
    if p.h.is_autonomous and p.h.is_convex:
        c = float(p.h.scale(0.0))
        d0 = min(abs(c * float(p.h.term.dleft(np.array(0.0)))), abs(c * float(p.h.term.dright(np.array(0.0)))))
        hg = d0 < threshold
        if not hg:
            notes.append(f"min |h'(0)| = {d0:.6g} >= N M / R = {threshold:.6g}")
    return CompatibilityReport(M, M0, sigma0, compatible, threshold, hg, notes)


def sigma_profile(p: RadialProblem, r_grid) -> tuple[np.ndarray, float]:
    """Per-radius slope bound ``sigma(r)`` (upper end of ``d g*(r, M0)``) and ``sigma0``."""
    rep = p.report
    if not rep.compatible:
        raise IncompatibleProblem(f"M0={rep.M0} >= M={rep.M}")
    r_grid = np.asarray(r_grid, dtype=float)
    _, hi = p.g.inverse(r_grid, np.full(r_grid.shape, rep.M0))
    return hi, rep.sigma0


def frad_value(p: RadialProblem, u: DiscreteProfile, eta: float = 0.0) -> float:
    """Exact-weight midpoint quadrature of the reduced functional.

    Returns ``+inf`` if a slope leaves the domain of ``g`` or violates the
    gradient constraint.
    """
    if not math.isclose(u.R, p.R, rel_tol=1e-12):
        raise GridMismatch(f"profile radius {u.R} != problem radius {p.R}")
    mid = u.mid
    s = np.abs(u.slopes)
    if p.constrained and np.any(s > p.mu_at(mid) * (1 + 1e-12)):
        return INF
    w = cell_weights(u.grid, p.N)
    gv = p.g.value(mid, s)
    if not np.all(np.isfinite(gv)):
        return INF
    hv = p.h.value(mid, u.u_mid) if eta == 0 else p.h.value_eta(mid, u.u_mid, eta)
    return float(np.sum(w * (gv + hv)))
